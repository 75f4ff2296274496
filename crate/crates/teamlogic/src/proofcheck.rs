//! Fitch-style proof checking for the natural deduction systems of BSML,
//! BSML with the emptiness operator, and BSML with inquisitive disjunction.
//!
//! A proof is a list of premises and a body of lines. Premises are cited by
//! their index `0..n`; lines carry their own ids. A subproof opens a
//! hypothesis: cited from inside, its id names the hypothesis; cited from
//! outside after it closes, its id names the whole subproof.
//!
//! Rules taking a subproof with several hypotheses (box monotonicity with
//! `n` boxed premises) nest one subproof per hypothesis, each ending in the next.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{parse, Formula, Tier};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum System {
    #[serde(rename = "BSML")]
    Bsml,
    #[serde(rename = "BSMLO")]
    Bsmlo,
    #[serde(rename = "BSMLI")]
    Bsmli,
}

impl System {
    pub fn name(self) -> &'static str {
        match self {
            System::Bsml => "BSML",
            System::Bsmlo => "BSMLO",
            System::Bsmli => "BSMLI",
        }
    }

    /// Whether formulas of this tier belong to the system's language.
    pub fn admits(self, tier: Tier) -> bool {
        match self {
            System::Bsml => tier <= Tier::Bsml,
            System::Bsmlo => tier <= Tier::Bsmlo,
            System::Bsmli => tier <= Tier::Bsml || tier == Tier::Bsmli,
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

macro_rules! rules {
    ($($r:ident),* $(,)?) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum RuleId { $($r),* }

        impl RuleId {
            pub const ALL: &'static [RuleId] = &[$(RuleId::$r),*];

            pub fn name(self) -> &'static str {
                match self { $(RuleId::$r => stringify!($r)),* }
            }
        }

        impl FromStr for RuleId {
            type Err = String;
            fn from_str(s: &str) -> Result<RuleId, String> {
                match s {
                    $(stringify!($r) => Ok(RuleId::$r),)*
                    _ => Err(format!("unknown rule `{s}`")),
                }
            }
        }
    };
}

rules!(
    AndI,
    AndEL,
    AndER,
    NegI,
    NegE,
    NegNegE,
    NegNegI,
    DMAnd,
    DMOr,
    NegNeE,
    OrI,
    OrW,
    ComOr,
    OrE,
    OrMon,
    BotE,
    BotCtr,
    DiaMon,
    BoxMon,
    InterDiaBox,
    DiaSep,
    DiaJoin,
    BoxInst,
    BoxDiaJoin,
    GOrIL,
    GOrIR,
    GOrE,
    DistrOrGOr,
    DMGOr,
    NeI,
    ConvDiaGOrOr,
    ConvBoxGOrOr,
    ONeI,
    OIFromBot,
    OIFromPhi,
    OE,
    NegOE,
    DiaOE,
    BoxOE,
    BotNeTrs,
    DiaBotNeTrs,
    BoxBotNeTrs,
    Reit,
    BotDef,
);

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl RuleId {
    pub fn systems(self) -> &'static [System] {
        use RuleId::*;
        match self {
            GOrIL | GOrIR | GOrE | DistrOrGOr | DMGOr | NeI | ConvDiaGOrOr | ConvBoxGOrOr => &[System::Bsmli],
            ONeI | OIFromBot | OIFromPhi | OE | NegOE | DiaOE | BoxOE => &[System::Bsmlo],
            BotNeTrs | DiaBotNeTrs | BoxBotNeTrs => &[System::Bsml],
            _ => &[System::Bsml, System::Bsmlo, System::Bsmli],
        }
    }

    pub fn in_system(self, sys: System) -> bool {
        self.systems().contains(&sys)
    }

    /// Rules read in either direction of a double line.
    pub fn is_double(self) -> bool {
        use RuleId::*;
        matches!(
            self,
            NegNegE
                | NegNegI
                | DMAnd
                | DMOr
                | NegNeE
                | InterDiaBox
                | DMGOr
                | ConvDiaGOrOr
                | ConvBoxGOrOr
                | NegOE
                | BotDef
        )
    }

    /// Rules locating an occurrence by `aux.path`.
    pub fn needs_path(self) -> bool {
        use RuleId::*;
        matches!(self, OE | DiaOE | BoxOE | BotNeTrs | DiaBotNeTrs | BoxBotNeTrs)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dir {
    /// Top of the double line to bottom.
    #[default]
    Fwd,
    Rev,
}

/// Rule-specific data attached to a line.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Aux {
    pub path: Option<Vec<usize>>,
    /// The formula expected at `path`, if the author states it.
    pub psi: Option<Formula>,
    pub dir: Dir,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Line {
    Infer { id: u64, formula: Formula, rule: RuleId, refs: Vec<u64>, aux: Aux },
    Subproof { id: u64, hypothesis: Formula, lines: Vec<Line> },
}

impl Line {
    pub fn id(&self) -> u64 {
        match self {
            Line::Infer { id, .. } | Line::Subproof { id, .. } => *id,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Proof {
    pub system: System,
    pub premises: Vec<Formula>,
    pub lines: Vec<Line>,
    pub conclusion: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("proof file: {0}")]
    Json(String),
    #[error("line {line}: {message}")]
    Formula { line: String, message: String },
    #[error("line {line}: {message}")]
    Rule { line: u64, message: String },
    #[error("duplicate id {0} (ids 0..{1} name the premises)")]
    DuplicateId(u64, usize),
}

// ---------------------------------------------------------------------------
// File format

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProofFile {
    system: System,
    #[serde(default)]
    premises: Vec<String>,
    lines: Vec<LineFile>,
    conclusion: String,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LineFile {
    Infer(InferFile),
    Sub(SubFile),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InferFile {
    id: u64,
    formula: String,
    rule: String,
    #[serde(default)]
    refs: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    aux: Option<AuxFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubFile {
    id: u64,
    hypothesis: String,
    lines: Vec<LineFile>,
}

#[derive(Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AuxFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    path: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    psi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dir: Option<Dir>,
}

fn parse_at(src: &str, line: impl fmt::Display) -> Result<Formula, LoadError> {
    parse(src).map_err(|e| LoadError::Formula { line: line.to_string(), message: format!("`{src}`: {e}") })
}

fn load_lines(files: Vec<LineFile>) -> Result<Vec<Line>, LoadError> {
    files
        .into_iter()
        .map(|l| match l {
            LineFile::Infer(f) => {
                let rule = f.rule.parse().map_err(|message| LoadError::Rule { line: f.id, message })?;
                let aux = f.aux.unwrap_or_default();
                Ok(Line::Infer {
                    id: f.id,
                    formula: parse_at(&f.formula, f.id)?,
                    rule,
                    refs: f.refs,
                    aux: Aux {
                        path: aux.path,
                        psi: aux.psi.map(|s| parse_at(&s, f.id)).transpose()?,
                        dir: aux.dir.unwrap_or_default(),
                    },
                })
            }
            LineFile::Sub(s) => {
                Ok(Line::Subproof { id: s.id, hypothesis: parse_at(&s.hypothesis, s.id)?, lines: load_lines(s.lines)? })
            }
        })
        .collect()
}

fn save_lines(lines: &[Line]) -> Vec<LineFile> {
    lines
        .iter()
        .map(|l| match l {
            Line::Infer { id, formula, rule, refs, aux } => {
                let file = AuxFile {
                    path: aux.path.clone(),
                    psi: aux.psi.as_ref().map(|f| f.to_string()),
                    dir: (aux.dir == Dir::Rev).then_some(Dir::Rev),
                };
                let empty = file.path.is_none() && file.psi.is_none() && file.dir.is_none();
                LineFile::Infer(InferFile {
                    id: *id,
                    formula: formula.to_string(),
                    rule: rule.name().to_string(),
                    refs: refs.clone(),
                    aux: (!empty).then_some(file),
                })
            }
            Line::Subproof { id, hypothesis, lines } => {
                LineFile::Sub(SubFile { id: *id, hypothesis: hypothesis.to_string(), lines: save_lines(lines) })
            }
        })
        .collect()
}

impl Proof {
    pub fn from_json(text: &str) -> Result<Proof, LoadError> {
        let file: ProofFile = serde_json::from_str(text).map_err(|e| LoadError::Json(e.to_string()))?;
        let premises = file
            .premises
            .iter()
            .enumerate()
            .map(|(i, p)| parse_at(p, format!("premise {i}")))
            .collect::<Result<Vec<_>, _>>()?;
        let proof = Proof {
            system: file.system,
            conclusion: parse_at(&file.conclusion, "conclusion")?,
            lines: load_lines(file.lines)?,
            premises,
        };
        let mut seen = BTreeSet::new();
        let mut stack: Vec<&Line> = proof.lines.iter().collect();
        while let Some(l) = stack.pop() {
            let id = l.id();
            if id < proof.premises.len() as u64 || !seen.insert(id) {
                return Err(LoadError::DuplicateId(id, proof.premises.len()));
            }
            if let Line::Subproof { lines, .. } = l {
                stack.extend(lines);
            }
        }
        Ok(proof)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ProofFile {
            system: self.system,
            premises: self.premises.iter().map(|p| p.to_string()).collect(),
            lines: save_lines(&self.lines),
            conclusion: self.conclusion.to_string(),
        })
        .expect("proof serializes")
    }
}

// ---------------------------------------------------------------------------
// Diagnostics

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorCode {
    WrongPremiseShape,
    SideConditionViolated,
    RuleNotInSystem,
    ScopeViolation,
    OccurrenceNotDistributive,
    MetavariableNotClassical,
    MissingAux,
    ConclusionMismatch,
    InvalidPath,
    FormulaNotInSystem,
}

impl ErrorCode {
    pub fn name(self) -> &'static str {
        match self {
            ErrorCode::WrongPremiseShape => "wrong-premise-shape",
            ErrorCode::SideConditionViolated => "side-condition-violated",
            ErrorCode::RuleNotInSystem => "rule-not-in-system",
            ErrorCode::ScopeViolation => "scope-violation",
            ErrorCode::OccurrenceNotDistributive => "occurrence-not-distributive",
            ErrorCode::MetavariableNotClassical => "metavariable-not-classical",
            ErrorCode::MissingAux => "missing-aux",
            ErrorCode::ConclusionMismatch => "conclusion-mismatch",
            ErrorCode::InvalidPath => "invalid-path",
            ErrorCode::FormulaNotInSystem => "formula-not-in-system",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    /// Offending line; absent for the final conclusion check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<u64>,
    pub code: ErrorCode,
    /// Name of the violated side condition.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: ")?,
            None => write!(f, "conclusion: ")?,
        }
        write!(f, "{}", self.code)?;
        if let Some(c) = &self.condition {
            write!(f, "({c})")?;
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub accepted: bool,
    pub system: System,
    pub lines: usize,
    pub diagnostics: Vec<Diagnostic>,
}

struct Fail {
    code: ErrorCode,
    condition: Option<String>,
    message: String,
}

fn fail(code: ErrorCode, message: impl Into<String>) -> Fail {
    Fail { code, condition: None, message: message.into() }
}

fn side(condition: &str, message: impl Into<String>) -> Fail {
    Fail { code: ErrorCode::SideConditionViolated, condition: Some(condition.to_string()), message: message.into() }
}

fn shape(message: impl Into<String>) -> Fail {
    fail(ErrorCode::WrongPremiseShape, message)
}

fn ensure(ok: bool, f: impl FnOnce() -> Fail) -> Result<(), Fail> {
    if ok {
        Ok(())
    } else {
        Err(f())
    }
}

// ---------------------------------------------------------------------------
// Rule schemas

/// One premise position of a rule schema.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Slot {
    Formula { pattern: String },
    Subproof { hypothesis: String, conclusion: String },
}

/// Premise shapes and conclusion pattern of a rule. Patterns use the
/// metavariables φ ψ χ (any formula) and α β (classical formulas).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Schema {
    pub rule: RuleId,
    pub premises: Vec<Slot>,
    pub conclusion: String,
}

fn fslot(p: &str) -> Slot {
    Slot::Formula { pattern: p.to_string() }
}

fn sslot(h: &str, c: &str) -> Slot {
    Slot::Subproof { hypothesis: h.to_string(), conclusion: c.to_string() }
}

/// Top-to-bottom reading of a double-line rule.
fn double_down(rule: RuleId, top: &Formula) -> Option<Formula> {
    use Formula as F;
    use RuleId::*;
    let neg = |f: &F| F::neg(f.clone());
    match (rule, top) {
        (NegNegE | NegNegI, F::Neg(a)) => match a.as_ref() {
            F::Neg(b) => Some((**b).clone()),
            _ => None,
        },
        (DMAnd, F::Neg(a)) => match a.as_ref() {
            F::And(x, y) => Some(F::or(neg(x), neg(y))),
            _ => None,
        },
        (DMOr, F::Neg(a)) => match a.as_ref() {
            F::TensorOr(x, y) => Some(F::and(neg(x), neg(y))),
            _ => None,
        },
        (DMGOr, F::Neg(a)) => match a.as_ref() {
            F::GlobalOr(x, y) => Some(F::and(neg(x), neg(y))),
            _ => None,
        },
        (NegNeE, F::Neg(a)) if **a == F::Ne => Some(F::BotWeak),
        (InterDiaBox, F::Neg(a)) => match a.as_ref() {
            F::Diamond(x) => Some(F::boxed(neg(x))),
            _ => None,
        },
        (NegOE, F::Neg(a)) => match a.as_ref() {
            F::Empty(x) => Some(neg(x)),
            _ => None,
        },
        (ConvDiaGOrOr, F::Diamond(a)) => match a.as_ref() {
            F::GlobalOr(x, y) => Some(F::or(F::dia((**x).clone()), F::dia((**y).clone()))),
            _ => None,
        },
        (ConvBoxGOrOr, F::Box(a)) => match a.as_ref() {
            F::GlobalOr(x, y) => Some(F::or(F::boxed((**x).clone()), F::boxed((**y).clone()))),
            _ => None,
        },
        (BotDef, F::And(a, b)) if **a == F::BotWeak && **b == F::Ne => Some(F::BotStrong),
        _ => None,
    }
}

/// The two alternatives of a path rule applied to `phi` (the formula inside the
/// modality for the modal variants), after validating the occurrence.
fn path_alternatives(rule: RuleId, phi: &Formula, aux: &Aux) -> Result<(Formula, Formula), Fail> {
    use RuleId::*;
    let path = aux
        .path
        .as_ref()
        .ok_or_else(|| fail(ErrorCode::MissingAux, format!("{rule} needs aux.path locating the occurrence")))?;
    let occ = phi
        .subformula_at(path)
        .map_err(|_| fail(ErrorCode::InvalidPath, format!("path {path:?} does not address a subformula of `{phi}`")))?;
    let emptiness = matches!(rule, OE | DiaOE | BoxOE);
    let psi = match (emptiness, occ) {
        (true, Formula::Empty(inner)) => (**inner).clone(),
        (true, other) => return Err(shape(format!("occurrence `{other}` is not of the form @ψ"))),
        (false, other) => other.clone(),
    };
    if let Some(stated) = &aux.psi {
        ensure(*stated == psi, || shape(format!("aux.psi `{stated}` differs from the occurrence `{psi}`")))?;
    }
    ensure(phi.is_distributive(path).expect("path checked"), || {
        fail(ErrorCode::OccurrenceNotDistributive, format!("occurrence at {path:?} in `{phi}` lies under ~, <> or []"))
    })?;
    let (a, b) = if emptiness {
        (psi, Formula::BotWeak)
    } else {
        (Formula::and(psi.clone(), Formula::Ne), Formula::and(psi, Formula::BotWeak))
    };
    let put = |f: &Formula| phi.replace_at(path, f).expect("path checked");
    Ok((put(&a), put(&b)))
}

/// Premise and conclusion patterns of `rule`. For path rules, passing the
/// major premise `phi` (without its modality for the modal variants) yields the
/// concrete subproof hypotheses or conclusion.
pub fn instantiate_rule(rule: RuleId, aux: &Aux, phi: Option<&Formula>) -> Result<Schema, String> {
    use RuleId::*;
    let rev = aux.dir == Dir::Rev;
    let dl = |top: &str, bottom: &str| {
        if rev {
            (vec![fslot(bottom)], top.to_string())
        } else {
            (vec![fslot(top)], bottom.to_string())
        }
    };
    let concrete = |wrap: fn(Formula) -> Formula| -> Result<Option<(Formula, Formula)>, String> {
        if rule.needs_path() && aux.path.is_none() {
            return Err(format!("missing-aux: {rule} needs aux.path"));
        }
        match phi {
            Some(p) => path_alternatives(rule, p, aux)
                .map(|(a, b)| Some((wrap(a), wrap(b))))
                .map_err(|f| format!("{}: {}", f.code, f.message)),
            None => Ok(None),
        }
    };
    let (premises, conclusion) = match rule {
        AndI => (vec![fslot("φ"), fslot("ψ")], "φ & ψ".into()),
        AndEL => (vec![fslot("φ & ψ")], "φ".into()),
        AndER => (vec![fslot("φ & ψ")], "ψ".into()),
        NegI => (vec![sslot("α", "bot")], "~α".into()),
        NegE => (vec![fslot("α"), fslot("~α")], "β".into()),
        NegNegE => dl("~~φ", "φ"),
        NegNegI => {
            if rev {
                (vec![fslot("~~φ")], "φ".into())
            } else {
                (vec![fslot("φ")], "~~φ".into())
            }
        }
        DMAnd => dl("~(φ & ψ)", "~φ | ~ψ"),
        DMOr => dl("~(φ | ψ)", "~φ & ~ψ"),
        NegNeE => dl("~NE", "bot"),
        OrI => (vec![fslot("φ")], "φ | ψ".into()),
        OrW => (vec![fslot("φ")], "φ | φ".into()),
        ComOr => (vec![fslot("φ | ψ")], "ψ | φ".into()),
        OrE => (vec![fslot("φ | ψ"), sslot("φ", "χ"), sslot("ψ", "χ")], "χ".into()),
        OrMon => (vec![fslot("φ | ψ"), sslot("ψ", "χ")], "φ | χ".into()),
        BotE => (vec![fslot("bot | φ")], "φ".into()),
        BotCtr => (vec![fslot("Bot | φ")], "ψ".into()),
        DiaMon => (vec![fslot("<>φ"), sslot("φ", "ψ")], "<>ψ".into()),
        BoxMon => (vec![fslot("[]φ1"), fslot("..."), fslot("[]φn"), sslot("φ1 ... φn", "ψ")], "[]ψ".into()),
        InterDiaBox => dl("~<>φ", "[]~φ"),
        DiaSep => (vec![fslot("<>(φ | ψ & NE)")], "<>ψ".into()),
        DiaJoin => (vec![fslot("<>φ"), fslot("<>ψ")], "<>(φ | ψ)".into()),
        BoxInst => (vec![fslot("[](φ & NE)")], "<>φ".into()),
        BoxDiaJoin => (vec![fslot("[]φ"), fslot("<>ψ")], "[](φ | ψ)".into()),
        GOrIL => (vec![fslot("φ")], "φ \\/ ψ".into()),
        GOrIR => (vec![fslot("ψ")], "φ \\/ ψ".into()),
        GOrE => (vec![fslot("φ \\/ ψ"), sslot("φ", "χ"), sslot("ψ", "χ")], "χ".into()),
        DistrOrGOr => (vec![fslot("φ | (ψ \\/ χ)")], "(φ | ψ) \\/ (φ | χ)".into()),
        DMGOr => dl("~(φ \\/ ψ)", "~φ & ~ψ"),
        NeI => (vec![], "bot \\/ NE".into()),
        ConvDiaGOrOr => dl("<>(φ \\/ ψ)", "<>φ | <>ψ"),
        ConvBoxGOrOr => dl("[](φ \\/ ψ)", "[]φ | []ψ"),
        ONeI => (vec![], "@NE".into()),
        OIFromBot => (vec![fslot("bot")], "@φ".into()),
        OIFromPhi => (vec![fslot("φ")], "@φ".into()),
        NegOE => dl("~@φ", "~φ"),
        Reit => (vec![fslot("φ")], "φ".into()),
        BotDef => dl("bot & NE", "Bot"),
        OE | BotNeTrs => {
            let (h1, h2) = match concrete(|f| f)? {
                Some((a, b)) => (a.to_string(), b.to_string()),
                None if rule == OE => ("φ[ψ/@ψ]".into(), "φ[bot/@ψ]".into()),
                None => ("φ[ψ & NE/ψ]".into(), "φ[ψ & bot/ψ]".into()),
            };
            let major = phi.map(|p| p.to_string()).unwrap_or_else(|| "φ".into());
            (vec![fslot(&major), sslot(&h1, "χ"), sslot(&h2, "χ")], "χ".into())
        }
        DiaOE | DiaBotNeTrs | BoxOE | BoxBotNeTrs => {
            let dia = matches!(rule, DiaOE | DiaBotNeTrs);
            let wrap: fn(Formula) -> Formula = if dia { Formula::dia } else { Formula::boxed };
            let m = if dia { "<>" } else { "[]" };
            let concl = match concrete(wrap)? {
                Some((a, b)) => Formula::or(a, b).to_string(),
                None if matches!(rule, DiaOE | BoxOE) => format!("{m}φ[ψ/@ψ] | {m}φ[bot/@ψ]"),
                None => format!("{m}φ[ψ & NE/ψ] | {m}φ[ψ & bot/ψ]"),
            };
            let major = phi.map(|p| wrap(p.clone()).to_string()).unwrap_or_else(|| format!("{m}φ"));
            (vec![fslot(&major)], concl)
        }
    };
    Ok(Schema { rule, premises, conclusion })
}

// ---------------------------------------------------------------------------
// Checking

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Assumption {
    Premise(u64),
    Hyp(u64),
}

enum Kind<'p> {
    Premise(&'p Formula),
    Infer { formula: &'p Formula, rule: RuleId, refs: &'p [u64], aux: &'p Aux },
    Sub { hyp: &'p Formula, body: Vec<u64> },
}

struct Node<'p> {
    seq: usize,
    /// Enclosing subproofs, outermost first.
    scope: Vec<u64>,
    kind: Kind<'p>,
}

/// What a reference resolves to.
#[derive(Clone, Copy)]
enum Cited {
    /// A formula line, premise or open hypothesis.
    Formula(u64),
    /// A closed subproof.
    Sub(u64),
}

struct Checker<'p> {
    proof: &'p Proof,
    nodes: HashMap<u64, Node<'p>>,
    order: Vec<u64>,
    deps: HashMap<u64, BTreeSet<Assumption>>,
}

impl<'p> Checker<'p> {
    fn new(proof: &'p Proof) -> Checker<'p> {
        let mut c = Checker { proof, nodes: HashMap::new(), order: Vec::new(), deps: HashMap::new() };
        for (i, p) in proof.premises.iter().enumerate() {
            c.push(i as u64, Vec::new(), Kind::Premise(p));
        }
        c.index(&proof.lines, &[]);
        c
    }

    fn push(&mut self, id: u64, scope: Vec<u64>, kind: Kind<'p>) {
        let seq = self.order.len();
        self.order.push(id);
        self.nodes.insert(id, Node { seq, scope, kind });
    }

    fn index(&mut self, lines: &'p [Line], scope: &[u64]) {
        for l in lines {
            match l {
                Line::Infer { id, formula, rule, refs, aux } => {
                    self.push(*id, scope.to_vec(), Kind::Infer { formula, rule: *rule, refs, aux })
                }
                Line::Subproof { id, hypothesis, lines } => {
                    let body = lines.iter().map(Line::id).collect();
                    self.push(*id, scope.to_vec(), Kind::Sub { hyp: hypothesis, body });
                    let mut inner = scope.to_vec();
                    inner.push(*id);
                    self.index(lines, &inner);
                }
            }
        }
    }

    fn node(&self, id: u64) -> &Node<'p> {
        &self.nodes[&id]
    }

    fn is_premise(&self, id: u64) -> bool {
        id < self.proof.premises.len() as u64
    }

    /// Resolves `target` as cited from line `from`.
    fn resolve(&self, from: u64, target: u64) -> Result<Cited, Fail> {
        let here = self.node(from);
        let there = self
            .nodes
            .get(&target)
            .ok_or_else(|| fail(ErrorCode::ScopeViolation, format!("reference to unknown line {target}")))?;
        if there.seq >= here.seq {
            return Err(fail(ErrorCode::ScopeViolation, format!("forward reference to line {target}")));
        }
        if matches!(there.kind, Kind::Sub { .. }) && here.scope.contains(&target) {
            return Ok(Cited::Formula(target));
        }
        ensure(here.scope.starts_with(&there.scope), || {
            fail(ErrorCode::ScopeViolation, format!("line {target} lies inside a closed subproof"))
        })?;
        Ok(match there.kind {
            Kind::Sub { .. } => Cited::Sub(target),
            _ => Cited::Formula(target),
        })
    }

    /// Formula of a premise, line, or (for a subproof id) its hypothesis.
    fn formula(&self, id: u64) -> &'p Formula {
        match self.node(id).kind {
            Kind::Premise(f) | Kind::Infer { formula: f, .. } | Kind::Sub { hyp: f, .. } => f,
        }
    }

    /// Final item of a subproof: its last line, or the hypothesis if the body is empty.
    fn last(&self, sub: u64) -> Option<u64> {
        match &self.node(sub).kind {
            Kind::Sub { body, .. } => body.last().copied(),
            _ => None,
        }
    }

    /// Conclusion formula of a subproof, if it ends in a formula.
    fn sub_conclusion(&self, sub: u64) -> Option<&'p Formula> {
        match self.last(sub) {
            None => Some(self.formula(sub)),
            Some(l) => match self.node(l).kind {
                Kind::Sub { .. } => None,
                _ => Some(self.formula(l)),
            },
        }
    }

    /// Open assumptions a premise, line, hypothesis (`as_hyp`) or closed subproof depends on.
    fn deps_of(&mut self, id: u64, as_hyp: bool) -> BTreeSet<Assumption> {
        if self.is_premise(id) {
            return BTreeSet::from([Assumption::Premise(id)]);
        }
        if as_hyp {
            return BTreeSet::from([Assumption::Hyp(id)]);
        }
        if let Some(d) = self.deps.get(&id) {
            return d.clone();
        }
        let d = match &self.node(id).kind {
            Kind::Premise(_) => unreachable!("handled above"),
            Kind::Infer { refs, .. } => {
                let refs: Vec<u64> = refs.to_vec();
                let mut acc = BTreeSet::new();
                for r in refs {
                    if let Ok(c) = self.resolve(id, r) {
                        acc.extend(match c {
                            Cited::Formula(t) => {
                                let hyp = matches!(self.node(t).kind, Kind::Sub { .. });
                                self.deps_of(t, hyp)
                            }
                            Cited::Sub(t) => self.deps_of(t, false),
                        });
                    }
                }
                acc
            }
            Kind::Sub { .. } => {
                let mut acc = match self.last(id) {
                    None => BTreeSet::new(),
                    Some(l) => self.deps_of(l, false),
                };
                acc.remove(&Assumption::Hyp(id));
                acc
            }
        };
        self.deps.insert(id, d.clone());
        d
    }

    /// Lines outside `sub` that the derivation of its conclusion cites,
    /// looking through closed subproofs it cites along the way.
    fn outer_citations(&self, sub: u64) -> BTreeSet<(u64, bool)> {
        let mut out = BTreeSet::new();
        let mut seen = BTreeSet::new();
        let mut stack: Vec<u64> = self.last(sub).into_iter().collect();
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                continue;
            }
            match &self.node(id).kind {
                Kind::Premise(_) => {}
                Kind::Sub { .. } => stack.extend(self.last(id)),
                Kind::Infer { refs, .. } => {
                    for &r in refs.iter() {
                        let Ok(c) = self.resolve(id, r) else { continue };
                        let inside = |t: u64| self.node(t).scope.contains(&sub);
                        match c {
                            Cited::Formula(t) if t == sub => {}
                            Cited::Formula(t) if inside(t) => stack.push(t),
                            Cited::Formula(t) => {
                                let hyp = matches!(self.node(t).kind, Kind::Sub { .. });
                                out.insert((t, hyp));
                            }
                            Cited::Sub(t) => stack.push(t),
                        }
                    }
                }
            }
        }
        out
    }

    /// The subproof's outside dependencies must be free of `NE`, unless they are theorems.
    fn ne_free_context(&mut self, sub: u64, condition: &str) -> Result<(), Fail> {
        for (t, hyp) in self.outer_citations(sub) {
            let f = self.formula(t);
            if !f.is_ne_free() && !self.deps_of(t, hyp).is_empty() {
                return Err(side(condition, format!("subproof {sub} depends on `{f}` (line {t}), which contains NE")));
            }
        }
        Ok(())
    }

    fn no_open_assumptions(&mut self, id: u64, condition: &str) -> Result<(), Fail> {
        let d = self.deps_of(id, false);
        if let Some(a) = d.iter().next() {
            let what = match a {
                Assumption::Premise(i) => format!("premise {i}"),
                Assumption::Hyp(h) => format!("hypothesis {h}"),
            };
            return Err(side(condition, format!("line {id} depends on {what}")));
        }
        Ok(())
    }

    /// Formulas written on a line must belong to the system's language.
    fn check_language(&self, id: u64) -> Result<(), Fail> {
        match &self.node(id).kind {
            Kind::Premise(f) | Kind::Sub { hyp: f, .. } => self.check_tier(id, f),
            Kind::Infer { formula, aux, .. } => {
                self.check_tier(id, formula)?;
                aux.psi.as_ref().map_or(Ok(()), |psi| self.check_tier(id, psi))
            }
        }
    }

    fn check_tier(&self, id: u64, f: &Formula) -> Result<(), Fail> {
        ensure(self.proof.system.admits(f.tier()), || {
            fail(
                ErrorCode::FormulaNotInSystem,
                if self.is_premise(id) {
                    format!("premise {id} `{f}` is not a {} formula", self.proof.system)
                } else {
                    format!("`{f}` is not a {} formula", self.proof.system)
                },
            )
        })
    }

    fn check_line(&mut self, id: u64) -> Result<(), Fail> {
        let (formula, rule, refs, aux) = match &self.node(id).kind {
            Kind::Infer { formula, rule, refs, aux } => (*formula, *rule, *refs, *aux),
            _ => return Ok(()),
        };
        ensure(rule.in_system(self.proof.system), || {
            fail(ErrorCode::RuleNotInSystem, format!("{rule} is not a rule of {}", self.proof.system))
        })?;
        let cited = refs.iter().map(|&r| self.resolve(id, r)).collect::<Result<Vec<_>, _>>()?;
        self.apply(formula, rule, aux, &cited)
    }

    fn fref(&self, c: Cited) -> Result<&'p Formula, Fail> {
        match c {
            Cited::Formula(t) => Ok(self.formula(t)),
            Cited::Sub(t) => Err(shape(format!("expected a formula, got the closed subproof {t}"))),
        }
    }

    /// Hypothesis and conclusion of a cited closed subproof.
    fn sref(&self, c: Cited) -> Result<(u64, &'p Formula, &'p Formula), Fail> {
        match c {
            Cited::Sub(t) => {
                let concl = self
                    .sub_conclusion(t)
                    .ok_or_else(|| shape(format!("subproof {t} ends in a subproof, not a formula")))?;
                Ok((t, self.formula(t), concl))
            }
            Cited::Formula(t) => Err(shape(format!("expected a closed subproof, got line {t}"))),
        }
    }

    fn apply(&mut self, f: &'p Formula, rule: RuleId, aux: &Aux, cited: &[Cited]) -> Result<(), Fail> {
        use Formula as F;
        use RuleId::*;
        let arity = |n: usize| {
            ensure(cited.len() == n, || shape(format!("{rule} takes {n} reference(s), got {}", cited.len())))
        };
        let expect = |want: &Formula| ensure(f == want, || shape(format!("{rule} yields `{want}`, not `{f}`")));
        let classical = |what: &str, g: &Formula| {
            ensure(g.is_classical(), || {
                fail(ErrorCode::MetavariableNotClassical, format!("{rule}: {what} := `{g}` is not classical"))
            })
        };

        if rule.is_double() {
            arity(1)?;
            let p = self.fref(cited[0])?;
            let flipped = rule == NegNegI;
            let (top, bottom) = if (aux.dir == Dir::Rev) != flipped { (f, p) } else { (p, f) };
            let down =
                double_down(rule, top).ok_or_else(|| shape(format!("`{top}` does not match the top of {rule}")))?;
            return ensure(down == *bottom, || shape(format!("{rule} relates `{top}` to `{down}`, not `{bottom}`")));
        }

        match rule {
            Reit => {
                arity(1)?;
                expect(self.fref(cited[0])?)
            }
            AndI => {
                arity(2)?;
                expect(&F::and(self.fref(cited[0])?.clone(), self.fref(cited[1])?.clone()))
            }
            AndEL | AndER => {
                arity(1)?;
                match self.fref(cited[0])? {
                    F::And(a, b) => expect(if rule == AndEL { a } else { b }),
                    g => Err(shape(format!("`{g}` is not a conjunction"))),
                }
            }
            NegI => {
                arity(1)?;
                let (sub, hyp, concl) = self.sref(cited[0])?;
                ensure(*concl == F::BotWeak, || shape(format!("subproof {sub} ends in `{concl}`, not bot")))?;
                classical("α", hyp)?;
                expect(&F::neg(hyp.clone()))?;
                self.ne_free_context(sub, "NegI(*)")
            }
            NegE => {
                arity(2)?;
                let a = self.fref(cited[0])?;
                let na = self.fref(cited[1])?;
                ensure(*na == F::neg(a.clone()), || shape(format!("`{na}` is not the negation of `{a}`")))?;
                classical("α", a)?;
                classical("β", f)
            }
            OrI => {
                arity(1)?;
                let a = self.fref(cited[0])?;
                match f {
                    F::TensorOr(l, r) if **l == *a => {
                        ensure(r.is_ne_free(), || side("OrI(*)", format!("introduced disjunct `{r}` contains NE")))
                    }
                    _ => Err(shape(format!("`{f}` is not `{a}` | ψ"))),
                }
            }
            OrW => {
                arity(1)?;
                let a = self.fref(cited[0])?.clone();
                expect(&F::or(a.clone(), a))
            }
            ComOr => {
                arity(1)?;
                match self.fref(cited[0])? {
                    F::TensorOr(a, b) => expect(&F::or((**b).clone(), (**a).clone())),
                    g => Err(shape(format!("`{g}` is not a split disjunction"))),
                }
            }
            OrE | GOrE => {
                arity(3)?;
                let (a, b) = match (rule, self.fref(cited[0])?) {
                    (OrE, F::TensorOr(a, b)) | (GOrE, F::GlobalOr(a, b)) => (a, b),
                    (_, g) => {
                        return Err(shape(format!(
                            "`{g}` is not a {} disjunction",
                            if rule == OrE { "split" } else { "inquisitive" }
                        )))
                    }
                };
                let (s1, h1, c1) = self.sref(cited[1])?;
                let (s2, h2, c2) = self.sref(cited[2])?;
                ensure(*h1 == **a && *h2 == **b, || shape(format!("subproofs must assume `{a}` and `{b}`")))?;
                ensure(c1 == f && c2 == f, || shape(format!("both subproofs must conclude `{f}`")))?;
                if rule == OrE {
                    self.ne_free_context(s1, "OrE(†)")?;
                    self.ne_free_context(s2, "OrE(†)")?;
                    ensure(f.is_gdis_free(), || side("OrE(‡)", format!("`{f}` contains \\/")))?;
                }
                Ok(())
            }
            OrMon => {
                arity(2)?;
                let (a, b) = match self.fref(cited[0])? {
                    F::TensorOr(a, b) => (a, b),
                    g => return Err(shape(format!("`{g}` is not a split disjunction"))),
                };
                let (s, h, c) = self.sref(cited[1])?;
                ensure(*h == **b, || shape(format!("subproof {s} must assume `{b}`")))?;
                expect(&F::or((**a).clone(), c.clone()))?;
                self.ne_free_context(s, "OrMon(†)")
            }
            BotE => {
                arity(1)?;
                match self.fref(cited[0])? {
                    F::TensorOr(l, r) if **l == F::BotWeak => expect(r),
                    g => Err(shape(format!("`{g}` is not bot | φ"))),
                }
            }
            BotCtr => {
                arity(1)?;
                match self.fref(cited[0])? {
                    F::TensorOr(l, _) if **l == F::BotStrong => Ok(()),
                    g => Err(shape(format!("`{g}` is not Bot | φ"))),
                }
            }
            DiaMon => {
                arity(2)?;
                let inner = match self.fref(cited[0])? {
                    F::Diamond(a) => a,
                    g => return Err(shape(format!("`{g}` is not a diamond"))),
                };
                let (s, h, c) = self.sref(cited[1])?;
                ensure(*h == **inner, || shape(format!("subproof {s} must assume `{inner}`")))?;
                expect(&F::dia(c.clone()))?;
                self.no_open_assumptions(s, "DiaMon(*)")
            }
            BoxMon => self.box_mon(f, cited),
            DiaSep => {
                arity(1)?;
                match self.fref(cited[0])? {
                    F::Diamond(a) => match a.as_ref() {
                        F::TensorOr(_, r) => match r.as_ref() {
                            F::And(psi, ne) if **ne == F::Ne => expect(&F::dia((**psi).clone())),
                            _ => Err(shape(format!("right disjunct `{r}` is not ψ & NE"))),
                        },
                        _ => Err(shape(format!("`{a}` is not a split disjunction"))),
                    },
                    g => Err(shape(format!("`{g}` is not a diamond"))),
                }
            }
            DiaJoin | BoxDiaJoin => {
                arity(2)?;
                let a = self.fref(cited[0])?;
                let b = self.fref(cited[1])?;
                match (rule, a, b) {
                    (DiaJoin, F::Diamond(x), F::Diamond(y)) => expect(&F::dia(F::or((**x).clone(), (**y).clone()))),
                    (BoxDiaJoin, F::Box(x), F::Diamond(y)) => expect(&F::boxed(F::or((**x).clone(), (**y).clone()))),
                    _ => Err(shape(format!("`{a}` and `{b}` do not fit {rule}"))),
                }
            }
            BoxInst => {
                arity(1)?;
                match self.fref(cited[0])? {
                    F::Box(a) => match a.as_ref() {
                        F::And(x, ne) if **ne == F::Ne => expect(&F::dia((**x).clone())),
                        _ => Err(shape(format!("`{a}` is not φ & NE"))),
                    },
                    g => Err(shape(format!("`{g}` is not a box"))),
                }
            }
            GOrIL | GOrIR => {
                arity(1)?;
                let a = self.fref(cited[0])?;
                match f {
                    F::GlobalOr(l, r) if (rule == GOrIL && **l == *a) || (rule == GOrIR && **r == *a) => Ok(()),
                    _ => Err(shape(format!(
                        "`{f}` does not have `{a}` as its {} disjunct",
                        if rule == GOrIL { "left" } else { "right" }
                    ))),
                }
            }
            DistrOrGOr => {
                arity(1)?;
                match self.fref(cited[0])? {
                    F::TensorOr(a, g) => match g.as_ref() {
                        F::GlobalOr(b, c) => {
                            expect(&F::gor(F::or((**a).clone(), (**b).clone()), F::or((**a).clone(), (**c).clone())))
                        }
                        _ => Err(shape(format!("`{g}` is not an inquisitive disjunction"))),
                    },
                    g => Err(shape(format!("`{g}` is not a split disjunction"))),
                }
            }
            NeI => {
                arity(0)?;
                expect(&F::gor(F::BotWeak, F::Ne))
            }
            ONeI => {
                arity(0)?;
                expect(&F::empty(F::Ne))
            }
            OIFromBot | OIFromPhi => {
                arity(1)?;
                let a = self.fref(cited[0])?;
                match f {
                    F::Empty(_) if rule == OIFromPhi => expect(&F::empty(a.clone())),
                    F::Empty(_) => ensure(*a == F::BotWeak, || shape(format!("`{a}` is not bot"))),
                    _ => Err(shape(format!("`{f}` is not of the form @φ"))),
                }
            }
            OE | BotNeTrs => {
                arity(3)?;
                let phi = self.fref(cited[0])?;
                let (h1, h2) = path_alternatives(rule, phi, aux)?;
                let (_, g1, c1) = self.sref(cited[1])?;
                let (_, g2, c2) = self.sref(cited[2])?;
                ensure(*g1 == h1, || shape(format!("first subproof must assume `{h1}`")))?;
                ensure(*g2 == h2, || shape(format!("second subproof must assume `{h2}`")))?;
                ensure(c1 == f && c2 == f, || shape(format!("both subproofs must conclude `{f}`")))
            }
            DiaOE | BoxOE | DiaBotNeTrs | BoxBotNeTrs => {
                arity(1)?;
                let dia = matches!(rule, DiaOE | DiaBotNeTrs);
                let inner = match (dia, self.fref(cited[0])?) {
                    (true, F::Diamond(a)) | (false, F::Box(a)) => a,
                    (_, g) => return Err(shape(format!("`{g}` is not a {}", if dia { "diamond" } else { "box" }))),
                };
                let (a, b) = path_alternatives(rule, inner, aux)?;
                let wrap = if dia { F::dia } else { F::boxed };
                expect(&F::or(wrap(a), wrap(b)))
            }
            _ => unreachable!("double-line rules handled above"),
        }
    }

    fn box_mon(&mut self, f: &'p Formula, cited: &[Cited]) -> Result<(), Fail> {
        use Formula as F;
        let psi = match f {
            F::Box(p) => p.as_ref(),
            _ => return Err(shape(format!("`{f}` is not a box"))),
        };
        let Some((&last, boxes)) = cited.split_last() else {
            return Err(shape("BoxMon needs at least one reference"));
        };
        if boxes.is_empty() {
            if let Cited::Formula(t) = last {
                // necessitation: a theorem ψ gives []ψ
                expect_eq(self.formula(t), psi)?;
                return self.no_open_assumptions(t, "BoxMon(*)");
            }
        }
        let mut sub = match last {
            Cited::Sub(s) => s,
            Cited::Formula(t) => return Err(shape(format!("expected a closed subproof, got line {t}"))),
        };
        let outer = sub;
        for (i, b) in boxes.iter().enumerate() {
            let phi = match self.fref(*b)? {
                F::Box(p) => p,
                g => return Err(shape(format!("`{g}` is not a box"))),
            };
            ensure(self.formula(sub) == phi.as_ref(), || shape(format!("subproof {sub} must assume `{phi}`")))?;
            if i + 1 < boxes.len() {
                match self.last(sub) {
                    Some(next) if matches!(self.node(next).kind, Kind::Sub { .. }) => sub = next,
                    _ => return Err(shape(format!("subproof {sub} must end in the subproof for the next box"))),
                }
            }
        }
        let concl = self
            .sub_conclusion(sub)
            .ok_or_else(|| shape(format!("subproof {sub} ends in a subproof, not a formula")))?;
        expect_eq(concl, psi)?;
        self.no_open_assumptions(outer, "BoxMon(*)")
    }
}

fn expect_eq(got: &Formula, want: &Formula) -> Result<(), Fail> {
    ensure(got == want, || shape(format!("expected `{want}`, got `{got}`")))
}

/// Checks every line and the final conclusion; the report lists all problems found.
pub fn check_proof(proof: &Proof) -> CheckReport {
    let mut c = Checker::new(proof);
    let mut diagnostics = Vec::new();
    let ids: Vec<u64> = c.order.clone();
    let mut lines = 0;
    for id in ids {
        if !c.is_premise(id) {
            lines += 1;
        }
        for e in [c.check_language(id), c.check_line(id)].into_iter().filter_map(Result::err) {
            diagnostics.push(Diagnostic {
                line: (!c.is_premise(id)).then_some(id),
                code: e.code,
                condition: e.condition,
                message: e.message,
            });
        }
    }
    match proof.lines.last() {
        Some(Line::Infer { formula, .. }) if *formula == proof.conclusion => {}
        Some(Line::Infer { formula, .. }) => diagnostics.push(Diagnostic {
            line: None,
            code: ErrorCode::ConclusionMismatch,
            condition: None,
            message: format!("last line proves `{formula}`, claimed `{}`", proof.conclusion),
        }),
        _ => diagnostics.push(Diagnostic {
            line: None,
            code: ErrorCode::ConclusionMismatch,
            condition: None,
            message: "the proof must end in a top-level formula line".into(),
        }),
    }
    if !proof.system.admits(proof.conclusion.tier()) {
        diagnostics.push(Diagnostic {
            line: None,
            code: ErrorCode::FormulaNotInSystem,
            condition: None,
            message: format!("`{}` is not a {} formula", proof.conclusion, proof.system),
        });
    }
    CheckReport { accepted: diagnostics.is_empty(), system: proof.system, lines, diagnostics }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("no line {0} in the proof")]
pub struct UnknownLine(pub u64);

/// Open premises and hypotheses the derivation of `line` uses.
pub fn undischarged_assumptions(proof: &Proof, line: u64) -> Result<BTreeSet<Formula>, UnknownLine> {
    let mut c = Checker::new(proof);
    if !c.nodes.contains_key(&line) {
        return Err(UnknownLine(line));
    }
    let deps = c.deps_of(line, false);
    Ok(deps
        .into_iter()
        .map(|a| match a {
            Assumption::Premise(i) | Assumption::Hyp(i) => c.formula(i).clone(),
        })
        .collect())
}

/// Rules of a system, by name.
pub fn rules_of(sys: System) -> BTreeMap<&'static str, RuleId> {
    RuleId::ALL.iter().filter(|r| r.in_system(sys)).map(|r| (r.name(), *r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn proof(json: &str) -> Proof {
        Proof::from_json(json).unwrap()
    }

    fn codes(r: &CheckReport) -> Vec<(ErrorCode, Option<String>)> {
        r.diagnostics.iter().map(|d| (d.code, d.condition.clone())).collect()
    }

    #[test]
    fn bot_strong_explodes() {
        let p = proof(
            r#"{"system":"BSML","premises":["Bot"],"lines":[
            {"id":1,"formula":"Bot | bot","rule":"OrI","refs":[0]},
            {"id":2,"formula":"p","rule":"BotCtr","refs":[1]}],"conclusion":"p"}"#,
        );
        let r = check_proof(&p);
        assert!(r.accepted, "{:?}", r.diagnostics);
    }

    #[test]
    fn or_intro_rejects_ne() {
        let p = proof(
            r#"{"system":"BSML","premises":["p"],"lines":[
            {"id":1,"formula":"p | NE","rule":"OrI","refs":[0]}],"conclusion":"p | NE"}"#,
        );
        let r = check_proof(&p);
        assert_eq!(codes(&r), vec![(ErrorCode::SideConditionViolated, Some("OrI(*)".into()))]);
    }

    #[test]
    fn system_gating() {
        let p = proof(
            r#"{"system":"BSML","premises":[],"lines":[
            {"id":0,"formula":"bot \\/ NE","rule":"NeI"}],"conclusion":"bot \\/ NE"}"#,
        );
        let r = check_proof(&p);
        assert!(codes(&r).contains(&(ErrorCode::RuleNotInSystem, None)));
        assert!(codes(&r).contains(&(ErrorCode::FormulaNotInSystem, None)));
    }

    #[test]
    fn scoping() {
        let p = proof(
            r#"{"system":"BSML","premises":["p"],"lines":[
            {"id":1,"hypothesis":"q","lines":[{"id":2,"formula":"q","rule":"Reit","refs":[1]}]},
            {"id":3,"formula":"q","rule":"Reit","refs":[2]},
            {"id":4,"formula":"p","rule":"Reit","refs":[5]},
            {"id":5,"formula":"p","rule":"Reit","refs":[0]}],"conclusion":"p"}"#,
        );
        let r = check_proof(&p);
        let lines: Vec<_> = r.diagnostics.iter().map(|d| (d.line, d.code)).collect();
        assert_eq!(lines, vec![(Some(3), ErrorCode::ScopeViolation), (Some(4), ErrorCode::ScopeViolation)]);
    }

    #[test]
    fn load_errors() {
        assert!(matches!(
            Proof::from_json(
                r#"{"system":"BSML","premises":["p"],"lines":[{"id":0,"formula":"p","rule":"Reit","refs":[0]}],"conclusion":"p"}"#
            ),
            Err(LoadError::DuplicateId(0, 1))
        ));
        assert!(Proof::from_json(r#"{"system":"BSML","lines":[],"conclusion":"p","extra":1}"#).is_err());
        assert!(Proof::from_json(
            r#"{"system":"BSML","lines":[{"id":1,"formula":"p","rule":"Nope"}],"conclusion":"p"}"#
        )
        .is_err());
        assert!(Proof::from_json(r#"{"system":"XX","lines":[],"conclusion":"p"}"#).is_err());
    }

    #[test]
    fn dependencies() {
        let p = proof(
            r#"{"system":"BSML","premises":["p","r"],"lines":[
            {"id":2,"hypothesis":"q","lines":[
                {"id":3,"formula":"q & p","rule":"AndI","refs":[2,0]}]},
            {"id":4,"formula":"p","rule":"Reit","refs":[0]}],"conclusion":"p"}"#,
        );
        let f = |s: &str| parse(s).unwrap();
        assert_eq!(undischarged_assumptions(&p, 3).unwrap(), BTreeSet::from([f("p"), f("q")]));
        assert_eq!(undischarged_assumptions(&p, 2).unwrap(), BTreeSet::from([f("p")]));
        assert_eq!(undischarged_assumptions(&p, 4).unwrap(), BTreeSet::from([f("p")]));
        assert!(undischarged_assumptions(&p, 9).is_err());
    }

    #[test]
    fn double_lines_both_ways() {
        for (top, bottom, rule) in [
            ("~~p", "p", "NegNegE"),
            ("~(p & q)", "~p | ~q", "DMAnd"),
            ("~<>p", "[]~p", "InterDiaBox"),
            ("bot & NE", "Bot", "BotDef"),
        ] {
            for (prem, concl, dir) in [(top, bottom, "fwd"), (bottom, top, "rev")] {
                let json = format!(
                    r#"{{"system":"BSML","premises":["{prem}"],"lines":[{{"id":1,"formula":"{concl}","rule":"{rule}","refs":[0],"aux":{{"dir":"{dir}"}}}}],"conclusion":"{concl}"}}"#
                );
                let r = check_proof(&proof(&json));
                assert!(r.accepted, "{rule} {dir}: {:?}", r.diagnostics);
            }
        }
    }

    #[test]
    fn schemas() {
        let s = instantiate_rule(RuleId::NeI, &Aux::default(), None).unwrap();
        assert!(s.premises.is_empty());
        assert_eq!(s.conclusion, "bot \\/ NE");
        let phi = parse("p | q").unwrap();
        let aux = Aux { path: Some(vec![1]), ..Aux::default() };
        let s = instantiate_rule(RuleId::BotNeTrs, &aux, Some(&phi)).unwrap();
        assert_eq!(s.premises[1], sslot("p | q & NE", "χ"));
        assert_eq!(s.premises[2], sslot("p | q & bot", "χ"));
        let phi = parse("p & @q").unwrap();
        let s = instantiate_rule(RuleId::DiaOE, &aux, Some(&phi)).unwrap();
        assert_eq!(s.conclusion, "<>(p & q) | <>(p & bot)");
        assert!(instantiate_rule(RuleId::OE, &Aux::default(), None).unwrap_err().starts_with("missing-aux"));
    }

    #[test]
    fn rule_tables() {
        assert_eq!(rules_of(System::Bsmli).len(), 26 + 8);
        assert_eq!(rules_of(System::Bsmlo).len(), 26 + 7);
        assert_eq!(rules_of(System::Bsml).len(), 26 + 3);
        for r in RuleId::ALL {
            assert_eq!(r.name().parse::<RuleId>().unwrap(), *r);
        }
    }
}
