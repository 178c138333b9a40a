//! Deterministic demonstration corpus.
//!
//! Three curricula, each with two courses, four topics and eight OERs.
//! Topic text is drawn from six application fields; some topics also borrow
//! from a second field, so similarity links cross curriculum boundaries.
//! The corpus vocabulary shares no word with the mock backend's filler
//! phrases.

use crate::eval::PathEntry;
use crate::kg::{Edge, KgError, KnowledgeGraph, LearningObjectNode, NodeId, TaxonomyLevel};

struct Field {
    sentences: [&'static str; 6],
    reflections: [&'static str; 2],
    keywords: [&'static str; 3],
}

const FIELDS: [Field; 6] = [
    Field {
        sentences: [
            "Regression models estimate a numeric target from measured input variables.",
            "Least squares fitting minimizes the squared residuals between predictions and observations.",
            "Residual plots reveal systematic errors of a fitted model.",
            "Regularization penalizes large coefficients to reduce overfitting.",
            "Cross validation estimates the prediction error on unseen data.",
            "Feature scaling puts input variables on comparable ranges.",
        ],
        reflections: [
            "Engineers use fitted models to predict component wear from sensor readings.",
            "Calibration of measurement devices relies on regression lines.",
        ],
        keywords: ["regression", "residuals", "overfitting"],
    },
    Field {
        sentences: [
            "Classifiers assign each sample to one of several discrete classes.",
            "Neural networks stack layers of weighted sums followed by nonlinear activations.",
            "Gradient descent updates network weights along the negative gradient of the loss.",
            "A confusion matrix counts correct and incorrect class predictions.",
            "Softmax outputs turn network scores to class probabilities.",
            "Dropout randomly disables neurons during training to limit overfitting.",
        ],
        reflections: [
            "Quality inspection lines classify defective parts from camera images.",
            "Maintenance teams flag faulty machines with trained classifiers.",
        ],
        keywords: ["classification", "neural networks", "gradient descent"],
    },
    Field {
        sentences: [
            "Data pipelines extract, transform and load records between storage systems.",
            "Batch jobs process large volumes of records on a fixed schedule.",
            "Schema validation rejects records with missing or malformed fields.",
            "Stream processing handles events continuously as they arrive.",
            "Workflow orchestrators schedule dependent tasks and retry failed steps.",
            "Partitioned tables speed up queries over time ranges.",
        ],
        reflections: [
            "Plant operators rely on pipelines to deliver fresh production data for each shift.",
            "Reporting dashboards depend on reliable nightly loads.",
        ],
        keywords: ["pipelines", "batch jobs", "streams"],
    },
    Field {
        sentences: [
            "Relational databases store records in tables linked by keys.",
            "SQL queries filter, join and aggregate rows from several tables.",
            "Indexes speed up lookups on frequently queried columns.",
            "Transactions preserve data consistency when several writers update rows.",
            "Normalization removes redundant columns by splitting tables.",
            "Query plans show how the database engine executes a statement.",
        ],
        reflections: [
            "Analysts answer production questions with SQL joins over sensor tables.",
            "Engineers tune indexes when reports become slow.",
        ],
        keywords: ["databases", "sql", "indexes"],
    },
    Field {
        sentences: [
            "Power grids balance electricity generation against consumer demand.",
            "Load forecasting predicts electricity demand for the coming hours.",
            "Frequency control stabilizes the grid when generation fluctuates.",
            "Transformers step voltage up for transmission and down for distribution.",
            "Smart meters report household consumption at short intervals.",
            "Peak shaving lowers the maximum load by shifting consumption.",
        ],
        reflections: [
            "Utility planners schedule power plants from load forecasts.",
            "Facility managers cut energy bills by shifting flexible loads.",
        ],
        keywords: ["power grid", "electricity demand", "load"],
    },
    Field {
        sentences: [
            "Solar panels convert sunlight to electricity with photovoltaic cells.",
            "Wind turbines capture kinetic energy from moving air.",
            "Battery storage shifts surplus renewable energy to hours of high demand.",
            "Inverters convert direct current to alternating current for the grid.",
            "Capacity factors compare actual output with the rated maximum output.",
            "Weather forecasts drive the expected output of renewable plants.",
        ],
        reflections: [
            "Project developers size battery systems for solar parks.",
            "Grid operators curtail wind farms during storms.",
        ],
        keywords: ["renewables", "solar", "storage"],
    },
];

struct TopicSpec {
    title: &'static str,
    field: usize,
    /// First sentence index into the field pool; topics sharing a field
    /// use disjoint halves.
    offset: usize,
    secondary: Option<usize>,
}

struct Curriculum {
    goal: &'static str,
    goal_description: &'static str,
    courses: [(&'static str, [TopicSpec; 2]); 2],
}

const CURRICULA: [Curriculum; 3] = [
    Curriculum {
        goal: "Machine Learning for Engineers",
        goal_description: "Build and evaluate predictive models for engineering data.",
        courses: [
            (
                "Supervised Learning",
                [
                    TopicSpec { title: "Linear Regression", field: 0, offset: 0, secondary: None },
                    TopicSpec { title: "Neural Network Classifiers", field: 1, offset: 0, secondary: None },
                ],
            ),
            (
                "Model Evaluation",
                [
                    TopicSpec { title: "Regularized Models", field: 0, offset: 3, secondary: None },
                    TopicSpec { title: "Classifier Metrics", field: 1, offset: 3, secondary: Some(3) },
                ],
            ),
        ],
    },
    Curriculum {
        goal: "Industrial Data Engineering",
        goal_description: "Move, store and query production data reliably.",
        courses: [
            (
                "Data Pipelines",
                [
                    TopicSpec { title: "Batch Processing", field: 2, offset: 0, secondary: None },
                    TopicSpec { title: "Stream Processing", field: 2, offset: 3, secondary: Some(4) },
                ],
            ),
            (
                "Database Systems",
                [
                    TopicSpec { title: "SQL Fundamentals", field: 3, offset: 0, secondary: None },
                    TopicSpec { title: "Query Optimization", field: 3, offset: 3, secondary: Some(2) },
                ],
            ),
        ],
    },
    Curriculum {
        goal: "Smart Energy Systems",
        goal_description: "Operate electricity grids with a growing share of renewable generation.",
        courses: [
            (
                "Grid Operations",
                [
                    TopicSpec { title: "Load Forecasting", field: 4, offset: 0, secondary: Some(0) },
                    TopicSpec { title: "Frequency Control", field: 4, offset: 3, secondary: None },
                ],
            ),
            (
                "Renewable Integration",
                [
                    TopicSpec { title: "Solar Power", field: 5, offset: 0, secondary: None },
                    TopicSpec { title: "Battery Storage", field: 5, offset: 3, secondary: Some(4) },
                ],
            ),
        ],
    },
];

const OER_KINDS: [&str; 2] = ["Lecture Notes", "Lab"];

fn id(s: String) -> NodeId {
    NodeId::new(s).expect("generated ids are non-empty")
}

fn sentence(field: usize, index: usize) -> &'static str {
    FIELDS[field].sentences[index % 6]
}

fn topic_text(topic: &TopicSpec, variant: usize) -> String {
    let a = topic.offset + variant;
    let mut parts = vec![sentence(topic.field, a), sentence(topic.field, a + 1)];
    if let Some(sec) = topic.secondary {
        parts.push(sentence(sec, variant));
    }
    parts.join(" ")
}

/// The demonstration knowledge graph, without similarity edges.
pub fn corpus() -> Result<KnowledgeGraph, KgError> {
    let mut g = KnowledgeGraph::new();
    let mut course_n = 0;
    let mut topic_n = 0;
    let mut oer_n = 0;
    for (gi, cur) in CURRICULA.iter().enumerate() {
        let goal_id = id(format!("g{}", gi + 1));
        g.add_node(LearningObjectNode::new(goal_id.as_str(), TaxonomyLevel::LearningGoal, cur.goal, cur.goal_description))?;
        for (course_title, topics) in &cur.courses {
            course_n += 1;
            let course_id = id(format!("c{course_n}"));
            let description = format!(
                "{course_title} combines {} and {}. {} {}",
                topics[0].title.to_lowercase(),
                topics[1].title.to_lowercase(),
                sentence(topics[0].field, topics[0].offset),
                sentence(topics[1].field, topics[1].offset),
            );
            g.add_node(
                LearningObjectNode::new(course_id.as_str(), TaxonomyLevel::Course, course_title, &description)
                    .with_reflection(FIELDS[topics[0].field].reflections[0])
                    .with_keywords(&FIELDS[topics[0].field].keywords),
            )?;
            g.add_edge(Edge::taxonomy(&goal_id, &course_id))?;
            for topic in topics {
                topic_n += 1;
                let topic_id = id(format!("t{topic_n:02}"));
                let f = &FIELDS[topic.field];
                g.add_node(
                    LearningObjectNode::new(topic_id.as_str(), TaxonomyLevel::Topic, topic.title, &topic_text(topic, 0))
                        .with_reflection(f.reflections[topic.offset / 3])
                        .with_keywords(&f.keywords),
                )?;
                g.add_edge(Edge::taxonomy(&course_id, &topic_id))?;
                for (k, kind) in OER_KINDS.iter().enumerate() {
                    oer_n += 1;
                    let oer_id = id(format!("o{oer_n:02}"));
                    let title = format!("{} {kind}", topic.title);
                    g.add_node(
                        LearningObjectNode::new(oer_id.as_str(), TaxonomyLevel::Oer, &title, &topic_text(topic, k + 1))
                            .with_reflection(f.reflections[(topic.offset / 3 + k + 1) % 2])
                            .with_keywords(&[f.keywords[k + 1]]),
                    )?;
                    g.add_edge(Edge::taxonomy(&topic_id, &oer_id))?;
                }
            }
        }
    }
    Ok(g)
}

/// Path requests for the evaluation run: the first OER of the first ten
/// topics, each toward its own curriculum's goal.
pub fn path_requests() -> Vec<PathEntry> {
    (0..10)
        .map(|t| PathEntry::Request {
            start: id(format!("o{:02}", 2 * t + 1)),
            goal: id(format!("g{}", t / 4 + 1)),
        })
        .collect()
}

/// Contents of the shipped corpus file.
pub fn corpus_jsonl() -> String {
    corpus().expect("synthetic corpus is valid").to_jsonl()
}

/// Contents of the shipped path list file.
pub fn paths_jsonl() -> String {
    path_requests()
        .iter()
        .map(|p| serde_json::to_string(p).expect("path entries serialize") + "\n")
        .collect()
}
