//! Line-oriented proof script format:
//!
//! ```text
//! step <id> axiom <AxiomId> : <formula>
//! step <id> mp <id1> <id2> : <formula>
//! step <id> gen <var> <id1> : <formula>
//! step <id> m <id1> : <formula>
//! step <id> fp <id1> : <formula>
//! step <id> us <id1> <p>/<arity> |-> <template> : <formula>
//! step <id> macro <name>(<args>) : <formula>
//! step <id> arith : <formula>
//! step <id> oracle : <formula>
//! qed <id>
//! ```
//!
//! Blank lines and lines starting with `//` are ignored.

use super::axioms::AxiomId;
use super::macros::MacroName;
use super::proof::{ProofScript, ProofStep, Rule};
use crate::syntax::{parse_formula, parse_template};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {msg}")]
pub struct ScriptError {
    pub line: usize,
    pub msg: String,
}

fn err(line: usize, msg: impl Into<String>) -> ScriptError {
    ScriptError {
        line,
        msg: msg.into(),
    }
}

/// Position of the separating `:` (one not followed by `=`).
fn find_colon(s: &str) -> Option<usize> {
    let bytes = s.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if b == b':' && bytes.get(i + 1) != Some(&b'=') {
            return Some(i);
        }
    }
    None
}

pub fn parse_script(text: &str) -> Result<ProofScript, ScriptError> {
    let mut steps = Vec::new();
    let mut qed: Option<String> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let n = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with("//") {
            continue;
        }
        if let Some(rest) = line.strip_prefix("qed") {
            let id = rest.trim();
            if id.is_empty() {
                return Err(err(n, "qed requires a step id"));
            }
            qed = Some(id.to_string());
            continue;
        }
        let rest = line
            .strip_prefix("step")
            .ok_or_else(|| err(n, "expected `step` or `qed`"))?;
        let colon = find_colon(rest).ok_or_else(|| err(n, "missing `:` before the formula"))?;
        let (head, formula_src) = rest.split_at(colon);
        let formula_src = &formula_src[1..];
        let conclusion = parse_formula(formula_src.trim())
            .map_err(|e| err(n, format!("formula: {e}")))?;
        let mut words = head.split_whitespace();
        let id = words
            .next()
            .ok_or_else(|| err(n, "missing step id"))?
            .to_string();
        let kind = words.next().ok_or_else(|| err(n, "missing rule name"))?;
        let rule = match kind {
            "axiom" => {
                let name = words.next().ok_or_else(|| err(n, "missing axiom id"))?;
                let ax = AxiomId::parse(name)
                    .ok_or_else(|| err(n, format!("unknown axiom id `{name}`")))?;
                Rule::Axiom(ax)
            }
            "mp" => {
                let a = words.next().ok_or_else(|| err(n, "mp needs two refs"))?;
                let b = words.next().ok_or_else(|| err(n, "mp needs two refs"))?;
                Rule::Mp(a.to_string(), b.to_string())
            }
            "gen" => {
                let x = words.next().ok_or_else(|| err(n, "gen needs a variable"))?;
                let a = words.next().ok_or_else(|| err(n, "gen needs a ref"))?;
                Rule::Gen(x.to_string(), a.to_string())
            }
            "m" => {
                let a = words.next().ok_or_else(|| err(n, "m needs a ref"))?;
                Rule::M(a.to_string())
            }
            "fp" => {
                let a = words.next().ok_or_else(|| err(n, "fp needs a ref"))?;
                Rule::Fp(a.to_string())
            }
            "us" => {
                // us <id1> <p>/<arity> |-> <template>
                let a = words.next().ok_or_else(|| err(n, "us needs a ref"))?;
                let spec = words.next().ok_or_else(|| err(n, "us needs p/arity"))?;
                let (p, arity) = spec
                    .split_once('/')
                    .ok_or_else(|| err(n, "us predicate must be written p/arity"))?;
                let arity: usize = arity
                    .parse()
                    .map_err(|_| err(n, "bad arity in us"))?;
                let remainder: Vec<&str> = words.collect();
                let mapsto = remainder
                    .first()
                    .copied()
                    .ok_or_else(|| err(n, "us needs `|->` and a template"))?;
                if mapsto != "|->" {
                    return Err(err(n, "expected `|->` after the predicate"));
                }
                let template_src = remainder[1..].join(" ");
                let template = parse_template(&template_src)
                    .map_err(|e| err(n, format!("template: {e}")))?;
                Rule::Us {
                    premise: a.to_string(),
                    pred: p.to_string(),
                    arity,
                    template,
                }
            }
            "macro" => {
                let call: String = words.collect::<Vec<_>>().join(" ");
                let open = call
                    .find('(')
                    .ok_or_else(|| err(n, "macro call needs parentheses"))?;
                let close = call
                    .rfind(')')
                    .ok_or_else(|| err(n, "macro call needs parentheses"))?;
                let name = MacroName::parse(call[..open].trim())
                    .ok_or_else(|| err(n, format!("unknown macro `{}`", &call[..open])))?;
                let args: Vec<String> = call[open + 1..close]
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
                Rule::Macro { name, args }
            }
            "arith" => Rule::Arith,
            "oracle" => Rule::Oracle,
            other => return Err(err(n, format!("unknown rule `{other}`"))),
        };
        steps.push(ProofStep {
            id,
            rule,
            conclusion,
        });
    }
    let qed = qed.ok_or_else(|| err(0, "missing qed line"))?;
    Ok(ProofScript { steps, qed })
}
