//! Opinion data models (SSA, ACOS, UOC), their enumerations and the flattened
//! leaf-component view shared by the metric and the agreement computations.

use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::agreement::ConceptName;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemaError {
    #[error("record is a {found} opinion but the schema expects {expected}")]
    Mismatch { expected: DataModel, found: DataModel },
    #[error("invalid value {literal:?} for enum field `{field}`")]
    Enum { field: String, literal: String },
    #[error("structure error: {0}")]
    Structure(String),
    #[error("invalid opinion: {0}")]
    Invalid(String),
}

macro_rules! text_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $lit:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $lit),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;

            /// Case-insensitive; surrounding whitespace is ignored.
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                let lowered = s.trim().to_lowercase();
                match lowered.as_str() {
                    $($lit => Ok($name::$variant),)+
                    _ => Err(s.to_string()),
                }
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse().map_err(|lit| {
                    serde::de::Error::custom(format!(
                        "invalid {} literal {:?}",
                        stringify!($name),
                        lit
                    ))
                })
            }
        }
    };
}

text_enum!(
    /// Identifier of one of the three opinion data models.
    DataModel { Ssa => "ssa", Acos => "acos", Uoc => "uoc" }
);

text_enum!(SentimentPolarity {
    Positive => "positive",
    Negative => "negative",
    Neutral => "neutral",
});

text_enum!(SentimentIntensity {
    Strong => "strong",
    Average => "average",
    Weak => "weak",
});

impl DataModel {
    pub fn schema(self) -> &'static DataModelSchema {
        match self {
            DataModel::Ssa => &SSA_SCHEMA,
            DataModel::Acos => &ACOS_SCHEMA,
            DataModel::Uoc => &UOC_SCHEMA,
        }
    }

    /// Upper-case label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            DataModel::Ssa => "SSA",
            DataModel::Acos => "ACOS",
            DataModel::Uoc => "UOC",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentiment {
    pub polarity: SentimentPolarity,
    pub expression: Option<String>,
    pub intensity: Option<SentimentIntensity>,
}

impl Sentiment {
    pub fn new(polarity: SentimentPolarity) -> Self {
        Sentiment {
            polarity,
            expression: None,
            intensity: None,
        }
    }
}

/// Aspect-category-opinion-sentiment quadruple. `None` spans encode implicit
/// aspects or opinions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcosQuad {
    pub aspect_term: Option<String>,
    pub category_entity: String,
    pub category_attribute: String,
    pub opinion_span: Option<String>,
    pub polarity: SentimentPolarity,
}

/// Structured sentiment tuple: holder, target and a sentiment expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SsaTuple {
    pub holder: Option<String>,
    pub target: Option<String>,
    pub sentiment: Sentiment,
}

/// Unified opinion record with entity, holder, aspect, reason and qualifier facets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UocOpinion {
    pub entity: String,
    pub holder_span: Option<String>,
    pub holder_entity: Option<String>,
    pub aspect_term: Option<String>,
    pub aspect_category: String,
    pub sentiment: Sentiment,
    pub reason: Option<String>,
    pub qualifier: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OpinionRecord {
    Acos(AcosQuad),
    Ssa(SsaTuple),
    Uoc(UocOpinion),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentKind {
    /// Verbatim text span expected to occur in the source text.
    Span,
    /// Free label or free text.
    Label,
    /// Closed vocabulary.
    Enum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LeafComponent {
    pub name: &'static str,
    pub kind: ComponentKind,
    pub optional: bool,
}

const fn leaf(name: &'static str, kind: ComponentKind, optional: bool) -> LeafComponent {
    LeafComponent {
        name,
        kind,
        optional,
    }
}

/// Flattened, comparable view of a data model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataModelSchema {
    pub model_id: DataModel,
    pub leaf_components: Vec<LeafComponent>,
    /// Leaf component name -> agreement concept, in leaf order.
    pub concept_map: Vec<(&'static str, ConceptName)>,
}

use ComponentKind::{Enum, Label, Span};

static SSA_SCHEMA: LazyLock<DataModelSchema> = LazyLock::new(|| DataModelSchema {
    model_id: DataModel::Ssa,
    leaf_components: vec![
        leaf("holder", Span, true),
        leaf("target", Span, true),
        leaf("polarity", Enum, false),
        leaf("expression", Span, true),
        leaf("intensity", Enum, true),
    ],
    concept_map: vec![
        ("holder", ConceptName::HolderSpan),
        ("target", ConceptName::Target),
        ("polarity", ConceptName::SentimentPolarity),
        ("expression", ConceptName::SentimentExpression),
        ("intensity", ConceptName::SentimentIntensity),
    ],
});

static ACOS_SCHEMA: LazyLock<DataModelSchema> = LazyLock::new(|| DataModelSchema {
    model_id: DataModel::Acos,
    leaf_components: vec![
        leaf("aspect_term", Span, true),
        leaf("category_entity", Label, false),
        leaf("category_attribute", Label, false),
        leaf("opinion_span", Span, true),
        leaf("polarity", Enum, false),
    ],
    concept_map: vec![
        ("aspect_term", ConceptName::AspectTerm),
        ("category_entity", ConceptName::Entity),
        ("category_attribute", ConceptName::Category),
        ("opinion_span", ConceptName::SentimentExpression),
        ("polarity", ConceptName::SentimentPolarity),
    ],
});

static UOC_SCHEMA: LazyLock<DataModelSchema> = LazyLock::new(|| DataModelSchema {
    model_id: DataModel::Uoc,
    leaf_components: vec![
        leaf("entity", Label, false),
        leaf("holder_span", Span, true),
        leaf("holder_entity", Label, true),
        leaf("aspect_term", Span, true),
        leaf("aspect_category", Label, false),
        leaf("polarity", Enum, false),
        leaf("expression", Span, true),
        leaf("intensity", Enum, true),
        leaf("reason", Label, true),
        leaf("qualifier", Label, true),
    ],
    concept_map: vec![
        ("entity", ConceptName::Entity),
        ("holder_span", ConceptName::HolderSpan),
        ("holder_entity", ConceptName::HolderEntity),
        ("aspect_term", ConceptName::AspectTerm),
        ("aspect_category", ConceptName::Category),
        ("polarity", ConceptName::SentimentPolarity),
        ("expression", ConceptName::SentimentExpression),
        ("intensity", ConceptName::SentimentIntensity),
        ("reason", ConceptName::Reason),
        ("qualifier", ConceptName::Qualifier),
    ],
});

impl DataModelSchema {
    pub fn leaf_count(&self) -> usize {
        self.leaf_components.len()
    }

    pub fn position(&self, component: &str) -> Option<usize> {
        self.leaf_components.iter().position(|c| c.name == component)
    }

    /// Leaf component mapped to `concept`, if the concept applies to this schema.
    pub fn component_for(&self, concept: ConceptName) -> Option<&'static str> {
        self.concept_map
            .iter()
            .find(|(_, c)| *c == concept)
            .map(|(name, _)| *name)
    }

    pub fn has_concept(&self, concept: ConceptName) -> bool {
        self.component_for(concept).is_some()
    }

    /// Human-readable field guide used in prompts.
    pub fn field_descriptions(&self) -> &'static str {
        match self.model_id {
            DataModel::Ssa => SSA_FIELDS,
            DataModel::Acos => ACOS_FIELDS,
            DataModel::Uoc => UOC_FIELDS,
        }
    }
}

const SSA_FIELDS: &str = "\
Each opinion is an object with the keys:
- \"sentiment\": object with \"polarity\" (positive, negative or neutral), \"expression\" (the text span expressing the sentiment, or null) and \"intensity\" (strong, average, weak, or null)
- \"target\": text span the sentiment is about, or null
- \"holder\": text span naming who holds the opinion, or null";

const ACOS_FIELDS: &str = "\
Each opinion is an object with the keys:
- \"sentiment\": positive, negative or neutral
- \"aspect_term\": text span of the aspect, or null when the aspect is implicit
- \"aspect_category\": object with \"entity\" and \"entity_attribute\" labels
- \"opinion_span\": text span of the opinion, or null when the opinion is implicit";

const UOC_FIELDS: &str = "\
Each opinion is an object with the keys:
- \"entity\": label of the entity the opinion concerns
- \"holder\": object with \"holder_span\" (text span, or null) and \"holder_entity\" (label, or null)
- \"aspect\": object with \"term\" (text span, or null) and \"category\" (label)
- \"sentiment\": object with \"polarity\" (positive, negative or neutral), \"expression\" (text span, or null) and \"intensity\" (strong, average, weak, or null)
- \"reason\": justification given for the opinion, or null
- \"qualifier\": text that limits the scope of the opinion, or null";

const QUOTES: &[(char, char)] = &[
    ('"', '"'),
    ('\'', '\''),
    ('`', '`'),
    ('\u{201c}', '\u{201d}'),
    ('\u{2018}', '\u{2019}'),
];

/// Canonical comparison form: lowercase, whitespace runs collapsed, enclosing
/// quotes removed.
pub fn normalize(s: &str) -> String {
    let mut out = s
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ");
    // Nested quote layers are all removed so that the function is idempotent.
    loop {
        let stripped = QUOTES.iter().find_map(|&(open, close)| {
            let inner = out.strip_prefix(open)?.strip_suffix(close)?;
            Some(inner.trim().to_string())
        });
        match stripped {
            Some(inner) => out = inner,
            None => return out,
        }
    }
}

fn norm_opt(s: &Option<String>) -> Option<String> {
    s.as_deref().map(normalize)
}

impl OpinionRecord {
    pub fn data_model(&self) -> DataModel {
        match self {
            OpinionRecord::Acos(_) => DataModel::Acos,
            OpinionRecord::Ssa(_) => DataModel::Ssa,
            OpinionRecord::Uoc(_) => DataModel::Uoc,
        }
    }

    /// Checks the per-model invariants.
    pub fn validate(&self) -> Result<(), SchemaError> {
        fn non_blank(field: &str, s: &str) -> Result<(), SchemaError> {
            if s.trim().is_empty() {
                Err(SchemaError::Invalid(format!("`{field}` must not be empty")))
            } else {
                Ok(())
            }
        }
        fn opt_non_blank(field: &str, s: &Option<String>) -> Result<(), SchemaError> {
            s.as_deref().map_or(Ok(()), |s| non_blank(field, s))
        }
        match self {
            OpinionRecord::Acos(q) => {
                non_blank("category_entity", &q.category_entity)?;
                non_blank("category_attribute", &q.category_attribute)?;
                opt_non_blank("aspect_term", &q.aspect_term)?;
                opt_non_blank("opinion_span", &q.opinion_span)
            }
            OpinionRecord::Ssa(t) => {
                opt_non_blank("holder", &t.holder)?;
                opt_non_blank("target", &t.target)?;
                opt_non_blank("expression", &t.sentiment.expression)?;
                if t.target.is_none() && t.sentiment.expression.is_none() {
                    return Err(SchemaError::Invalid(
                        "an SSA tuple needs a target or a sentiment expression".into(),
                    ));
                }
                Ok(())
            }
            OpinionRecord::Uoc(u) => {
                non_blank("entity", &u.entity)?;
                non_blank("aspect_category", &u.aspect_category)?;
                for (field, value) in [
                    ("holder_span", &u.holder_span),
                    ("holder_entity", &u.holder_entity),
                    ("aspect_term", &u.aspect_term),
                    ("expression", &u.sentiment.expression),
                    ("reason", &u.reason),
                    ("qualifier", &u.qualifier),
                ] {
                    opt_non_blank(field, value)?;
                }
                Ok(())
            }
        }
    }

    /// Canonical serialized form, with explicit nulls.
    pub fn to_value(&self) -> Value {
        fn opt(s: &Option<String>) -> Value {
            s.as_ref().map_or(Value::Null, |s| Value::String(s.clone()))
        }
        fn sentiment(s: &Sentiment) -> Value {
            let mut m = Map::new();
            m.insert("polarity".into(), s.polarity.as_str().into());
            m.insert("expression".into(), opt(&s.expression));
            m.insert(
                "intensity".into(),
                s.intensity.map_or(Value::Null, |i| i.as_str().into()),
            );
            Value::Object(m)
        }
        let mut m = Map::new();
        match self {
            OpinionRecord::Ssa(t) => {
                m.insert("sentiment".into(), sentiment(&t.sentiment));
                m.insert("target".into(), opt(&t.target));
                m.insert("holder".into(), opt(&t.holder));
            }
            OpinionRecord::Acos(q) => {
                m.insert("sentiment".into(), q.polarity.as_str().into());
                m.insert("aspect_term".into(), opt(&q.aspect_term));
                let mut cat = Map::new();
                cat.insert("entity".into(), q.category_entity.clone().into());
                cat.insert(
                    "entity_attribute".into(),
                    q.category_attribute.clone().into(),
                );
                m.insert("aspect_category".into(), Value::Object(cat));
                m.insert("opinion_span".into(), opt(&q.opinion_span));
            }
            OpinionRecord::Uoc(u) => {
                m.insert("entity".into(), u.entity.clone().into());
                let mut holder = Map::new();
                holder.insert("holder_span".into(), opt(&u.holder_span));
                holder.insert("holder_entity".into(), opt(&u.holder_entity));
                m.insert("holder".into(), Value::Object(holder));
                let mut aspect = Map::new();
                aspect.insert("term".into(), opt(&u.aspect_term));
                aspect.insert("category".into(), u.aspect_category.clone().into());
                m.insert("aspect".into(), Value::Object(aspect));
                m.insert("sentiment".into(), sentiment(&u.sentiment));
                m.insert("reason".into(), opt(&u.reason));
                m.insert("qualifier".into(), opt(&u.qualifier));
            }
        }
        Value::Object(m)
    }
}

/// Normalized leaf values of `opinion`, in schema order.
pub fn leaf_values(
    opinion: &OpinionRecord,
    schema: &DataModelSchema,
) -> Result<Vec<Option<String>>, SchemaError> {
    if opinion.data_model() != schema.model_id {
        return Err(SchemaError::Mismatch {
            expected: schema.model_id,
            found: opinion.data_model(),
        });
    }
    let polarity = |p: SentimentPolarity| Some(p.as_str().to_string());
    let intensity = |i: Option<SentimentIntensity>| i.map(|i| i.as_str().to_string());
    Ok(match opinion {
        OpinionRecord::Ssa(t) => vec![
            norm_opt(&t.holder),
            norm_opt(&t.target),
            polarity(t.sentiment.polarity),
            norm_opt(&t.sentiment.expression),
            intensity(t.sentiment.intensity),
        ],
        OpinionRecord::Acos(q) => vec![
            norm_opt(&q.aspect_term),
            Some(normalize(&q.category_entity)),
            Some(normalize(&q.category_attribute)),
            norm_opt(&q.opinion_span),
            polarity(q.polarity),
        ],
        OpinionRecord::Uoc(u) => vec![
            Some(normalize(&u.entity)),
            norm_opt(&u.holder_span),
            norm_opt(&u.holder_entity),
            norm_opt(&u.aspect_term),
            Some(normalize(&u.aspect_category)),
            polarity(u.sentiment.polarity),
            norm_opt(&u.sentiment.expression),
            intensity(u.sentiment.intensity),
            norm_opt(&u.reason),
            norm_opt(&u.qualifier),
        ],
    })
}

/// Consumes keys from a JSON object and rejects whatever is left over.
struct Fields<'a> {
    ctx: &'a str,
    map: Map<String, Value>,
}

impl<'a> Fields<'a> {
    fn new(ctx: &'a str, value: &Value) -> Result<Self, SchemaError> {
        match value {
            Value::Object(map) => Ok(Fields {
                ctx,
                map: map.clone(),
            }),
            other => Err(SchemaError::Structure(format!(
                "{ctx}: expected an object, found {}",
                type_name(other)
            ))),
        }
    }

    fn take(&mut self, key: &str) -> Option<Value> {
        self.map.remove(key).filter(|v| !v.is_null())
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn opt_text(&mut self, key: &str) -> Result<Option<String>, SchemaError> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::String(s)) if s.trim().is_empty() => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(other) => Err(SchemaError::Structure(format!(
                "{}.{key}: expected text, found {}",
                self.ctx,
                type_name(&other)
            ))),
        }
    }

    fn text(&mut self, key: &str) -> Result<String, SchemaError> {
        self.opt_text(key)?.ok_or_else(|| {
            SchemaError::Structure(format!("{}: missing required field `{key}`", self.ctx))
        })
    }

    fn finish(self) -> Result<(), SchemaError> {
        match self.map.keys().next() {
            None => Ok(()),
            Some(k) => Err(SchemaError::Structure(format!(
                "{}: unknown key `{k}`",
                self.ctx
            ))),
        }
    }
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "text",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

fn parse_enum<T: FromStr>(field: &str, value: Value) -> Result<T, SchemaError> {
    match value {
        Value::String(s) => s.parse().map_err(|_| SchemaError::Enum {
            field: field.to_string(),
            literal: s,
        }),
        other => Err(SchemaError::Enum {
            field: field.to_string(),
            literal: other.to_string(),
        }),
    }
}

fn parse_sentiment(ctx: &str, value: Value) -> Result<Sentiment, SchemaError> {
    if let Value::String(_) = value {
        return Ok(Sentiment::new(parse_enum("sentiment.polarity", value)?));
    }
    let mut f = Fields::new(ctx, &value)?;
    let polarity = f.take("polarity").ok_or_else(|| {
        SchemaError::Structure(format!("{ctx}: missing required field `polarity`"))
    })?;
    let polarity = parse_enum("sentiment.polarity", polarity)?;
    let expression = f.opt_text("expression")?;
    let intensity = match f.take("intensity") {
        None => None,
        Some(Value::String(s)) if s.trim().is_empty() => None,
        Some(v) => Some(parse_enum("sentiment.intensity", v)?),
    };
    f.finish()?;
    Ok(Sentiment {
        polarity,
        expression,
        intensity,
    })
}

/// Parses one structured opinion under `schema`. Enum literals are matched
/// case-insensitively, unknown keys are rejected and missing optional keys
/// read as null.
pub fn parse_opinion(value: &Value, schema: &DataModelSchema) -> Result<OpinionRecord, SchemaError> {
    let record = match schema.model_id {
        DataModel::Ssa => {
            let mut f = Fields::new("ssa", value)?;
            let sentiment = f.take("sentiment").ok_or_else(|| {
                SchemaError::Structure("ssa: missing required field `sentiment`".into())
            })?;
            let sentiment = parse_sentiment("ssa.sentiment", sentiment)?;
            let target = f.opt_text("target")?;
            let holder = f.opt_text("holder")?;
            f.finish()?;
            OpinionRecord::Ssa(SsaTuple {
                holder,
                target,
                sentiment,
            })
        }
        DataModel::Acos => {
            let mut f = Fields::new("acos", value)?;
            let polarity = f.take("sentiment").ok_or_else(|| {
                SchemaError::Structure("acos: missing required field `sentiment`".into())
            })?;
            let polarity = parse_enum("sentiment", polarity)?;
            let aspect_term = f.opt_text("aspect_term")?;
            let opinion_span = f.opt_text("opinion_span")?;
            let category = f.take("aspect_category").ok_or_else(|| {
                SchemaError::Structure("acos: missing required field `aspect_category`".into())
            })?;
            f.finish()?;
            let mut c = Fields::new("acos.aspect_category", &category)?;
            let category_entity = c.text("entity")?;
            let category_attribute = c.text("entity_attribute")?;
            c.finish()?;
            OpinionRecord::Acos(AcosQuad {
                aspect_term,
                category_entity,
                category_attribute,
                opinion_span,
                polarity,
            })
        }
        DataModel::Uoc => {
            let mut f = Fields::new("uoc", value)?;
            let entity = f.text("entity")?;
            let (mut holder_span, mut holder_entity) = (None, None);
            match f.take("holder") {
                None => {}
                Some(Value::String(s)) => holder_span = Some(s).filter(|s| !s.trim().is_empty()),
                Some(h) => {
                    let mut h = Fields::new("uoc.holder", &h)?;
                    holder_span = h.opt_text("holder_span")?;
                    holder_entity = h.opt_text("holder_entity")?;
                    h.finish()?;
                }
            }
            // Flat spellings of the nested holder/aspect keys are accepted too.
            if f.has("holder_span") {
                holder_span = f.opt_text("holder_span")?;
            }
            if f.has("holder_entity") {
                holder_entity = f.opt_text("holder_entity")?;
            }
            let (mut aspect_term, mut aspect_category) = (None, None);
            if let Some(a) = f.take("aspect") {
                let mut a = Fields::new("uoc.aspect", &a)?;
                aspect_term = a.opt_text("term")?;
                aspect_category = a.opt_text("category")?;
                a.finish()?;
            }
            if f.has("aspect_term") {
                aspect_term = f.opt_text("aspect_term")?;
            }
            if f.has("aspect_category") {
                aspect_category = f.opt_text("aspect_category")?;
            }
            let aspect_category = aspect_category.ok_or_else(|| {
                SchemaError::Structure("uoc: missing required field `aspect.category`".into())
            })?;
            let sentiment = f.take("sentiment").ok_or_else(|| {
                SchemaError::Structure("uoc: missing required field `sentiment`".into())
            })?;
            let sentiment = parse_sentiment("uoc.sentiment", sentiment)?;
            let reason = f.opt_text("reason")?;
            let qualifier = f.opt_text("qualifier")?;
            f.finish()?;
            OpinionRecord::Uoc(UocOpinion {
                entity,
                holder_span,
                holder_entity,
                aspect_term,
                aspect_category,
                sentiment,
                reason,
                qualifier,
            })
        }
    };
    record.validate()?;
    Ok(record)
}

impl Serialize for OpinionRecord {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_value().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for OpinionRecord {
    /// Infers the data model from the canonical key set.
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = Value::deserialize(deserializer)?;
        let model = match &value {
            Value::Object(m) if m.contains_key("entity") => DataModel::Uoc,
            Value::Object(m) if m.contains_key("aspect_category") => DataModel::Acos,
            _ => DataModel::Ssa,
        };
        parse_opinion(&value, model.schema()).map_err(serde::de::Error::custom)
    }
}

/// Parses a list of canonical opinions under one model.
pub fn parse_opinions(values: &[Value], model: DataModel) -> Result<Vec<OpinionRecord>, SchemaError> {
    values
        .iter()
        .map(|v| parse_opinion(v, model.schema()))
        .collect()
}
