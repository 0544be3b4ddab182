//! Fixture tables behind the mock backends.

use crate::ideation::Category;
use crate::scaffold::RelationKind;

pub(crate) type ExpansionTable = &'static [(&'static str, &'static [(&'static str, &'static str)])];

/// Knowledge-base style neighbours.
pub(crate) const KB_EXPANSIONS: ExpansionTable = &[
    (
        "hope",
        &[
            ("seed", "a plant embryo in a protective coat"),
            ("sunrise", "the sun appearing over the horizon"),
            ("rainbow", "an arc of spectral colours in the sky"),
            ("candle", "a wax stick with a burning wick"),
            ("optimism", "a hopeful outlook"),
            ("plant", "a living organism of the kingdom plantae"),
            ("anchor", "a heavy device that holds a ship in place"),
        ],
    ),
    (
        "fast food",
        &[
            ("hamburger", "a patty served in a sliced bun"),
            ("french fry", "a deep-fried strip of potato"),
            ("cheese slice", "a thin square of processed cheese"),
            ("pizza", "a flat baked dough with toppings"),
            ("food", "any nourishing substance"),
            ("eating", "the act of consuming food"),
            ("convenience", "the state of being easy to use"),
        ],
    ),
    ("seed", &[("sprout", "a young shoot"), ("flower", "the blossom of a plant")]),
    ("sunrise", &[("sun", "the star at the centre of the solar system")]),
    ("hamburger", &[("bun", "a small round bread roll"), ("patty", "a flat disc of ground meat")]),
    ("pizza", &[("pizza slice", "a wedge cut from a pizza")]),
];

/// Language-model style associations.
pub(crate) const LLM_EXPANSIONS: ExpansionTable = &[
    (
        "hope",
        &[
            ("phoenix", "a mythical bird reborn from its ashes"),
            ("lighthouse", "a tower with a guiding light for ships"),
            ("seed", "a plant embryo in a protective coat"),
            ("dove", "a small white bird"),
            ("wishing", "the act of wanting something to happen"),
        ],
    ),
    (
        "fast food",
        &[
            ("hot dog", "a sausage in a split roll"),
            ("soda cup", "a paper cup with a lid and straw"),
            ("fried chicken", "battered and deep-fried chicken pieces"),
            ("hamburger", "a patty served in a sliced bun"),
        ],
    ),
    ("lighthouse", &[("beacon", "a signal fire or light")]),
];

pub(crate) struct ScoreFixture {
    pub label: &'static str,
    pub scores: (u8, u8, u8, u8),
    pub category: Category,
}

const fn obj(label: &'static str, scores: (u8, u8, u8, u8)) -> ScoreFixture {
    ScoreFixture { label, scores, category: Category::ConcreteObject }
}

pub(crate) const DEFAULT_SCORES: (u8, u8, u8, u8) = (3, 4, 4, 5);

pub(crate) const SCORES: &[ScoreFixture] = &[
    obj("seed", (5, 7, 6, 9)),
    obj("sunrise", (4, 7, 7, 8)),
    obj("rainbow", (4, 7, 7, 7)),
    obj("candle", (5, 7, 7, 7)),
    obj("anchor", (5, 5, 6, 6)),
    obj("phoenix", (4, 4, 6, 8)),
    obj("lighthouse", (5, 5, 7, 8)),
    obj("dove", (5, 6, 6, 8)),
    obj("sprout", (5, 5, 6, 8)),
    obj("flower", (5, 7, 7, 6)),
    obj("sun", (5, 7, 7, 6)),
    obj("beacon", (4, 4, 5, 7)),
    ScoreFixture { label: "optimism", scores: (1, 6, 3, 8), category: Category::AbstractNoun },
    ScoreFixture { label: "plant", scores: (4, 7, 6, 5), category: Category::SuperordinateCategory },
    ScoreFixture { label: "wishing", scores: (2, 6, 4, 7), category: Category::IntangibleAction },
    obj("hamburger", (5, 7, 7, 9)),
    obj("french fry", (5, 7, 7, 8)),
    obj("cheese slice", (5, 6, 6, 7)),
    obj("pizza", (5, 7, 7, 8)),
    obj("hot dog", (5, 6, 7, 8)),
    obj("soda cup", (5, 6, 6, 6)),
    obj("fried chicken", (5, 6, 6, 7)),
    obj("bun", (5, 6, 6, 5)),
    obj("patty", (5, 5, 5, 6)),
    obj("pizza slice", (5, 6, 7, 7)),
    ScoreFixture { label: "food", scores: (3, 7, 5, 6), category: Category::SuperordinateCategory },
    ScoreFixture { label: "eating", scores: (3, 7, 6, 6), category: Category::IntangibleAction },
    ScoreFixture { label: "convenience", scores: (1, 6, 2, 6), category: Category::AbstractNoun },
];

/// (candidate, input concept, interpretation)
pub(crate) const INTERPRETATIONS: &[(&str, &str, &str)] = &[
    (
        "seed",
        "hope",
        "a seed carries the promise of growth: something small and buried that can still become a whole plant",
    ),
    ("sunrise", "hope", "each sunrise marks a fresh start after the dark of night"),
    ("lighthouse", "hope", "a lighthouse guides ships home through storms"),
    ("phoenix", "hope", "the phoenix rises renewed from its own ashes"),
    ("hamburger", "fast food", "the hamburger is the most recognisable quick-service meal"),
    ("french fry", "fast food", "fries are the default side of nearly every fast food order"),
];

pub(crate) type RelationRow = (&'static str, RelationKind, &'static str, f64);

pub(crate) const RELATIONS: &[RelationRow] = &[
    ("hamburger", RelationKind::KindOf, "fast food", 2.0),
    ("hamburger", RelationKind::KindOf, "sandwich", 1.8),
    ("hamburger", RelationKind::Synonym, "burger", 2.5),
    ("hamburger", RelationKind::Hyponym, "cheeseburger", 1.6),
    ("hamburger", RelationKind::Hypernym, "food", 1.2),
    ("hamburger", RelationKind::PartOf, "bun", 2.2),
    ("hamburger", RelationKind::PartOf, "patty", 2.1),
    ("hamburger", RelationKind::PartOf, "lettuce", 1.4),
    ("hamburger", RelationKind::PartOf, "cheese", 1.3),
    ("hamburger", RelationKind::AttributeOf, "round", 1.0),
    ("hamburger", RelationKind::UsedFor, "eating", 2.0),
    ("hamburger", RelationKind::AtLocation, "restaurant", 1.9),
    ("hamburger", RelationKind::RelatedTo, "french fry", 1.7),
    ("hamburger", RelationKind::RelatedTo, "soda", 1.1),
    ("hamburger", RelationKind::SimilarTo, "sandwich", 0.9),
    ("seed", RelationKind::KindOf, "plant part", 1.5),
    ("seed", RelationKind::Hyponym, "acorn", 1.2),
    ("seed", RelationKind::Synonym, "kernel", 1.0),
    ("seed", RelationKind::PartOf, "seed coat", 1.6),
    ("seed", RelationKind::PartOf, "embryo", 1.4),
    ("seed", RelationKind::AttributeOf, "small", 1.1),
    ("seed", RelationKind::UsedFor, "planting", 2.0),
    ("seed", RelationKind::AtLocation, "soil", 1.8),
    ("seed", RelationKind::SymbolOf, "new life", 1.7),
    ("seed", RelationKind::RelatedTo, "sprout", 1.5),
    ("sunrise", RelationKind::KindOf, "daybreak", 1.4),
    ("sunrise", RelationKind::PartOf, "sun", 1.8),
    ("sunrise", RelationKind::PartOf, "horizon", 1.6),
    ("sunrise", RelationKind::AtLocation, "sky", 1.5),
    ("sunrise", RelationKind::SymbolOf, "new beginning", 1.9),
    ("lighthouse", RelationKind::KindOf, "tower", 1.7),
    ("lighthouse", RelationKind::PartOf, "lamp", 1.8),
    ("lighthouse", RelationKind::PartOf, "gallery", 1.1),
    ("lighthouse", RelationKind::UsedFor, "navigation", 1.9),
    ("lighthouse", RelationKind::AtLocation, "coast", 1.6),
    ("lighthouse", RelationKind::SymbolOf, "guidance", 1.4),
];
