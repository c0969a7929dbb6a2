//! Line-oriented instance text format.
//!
//! ```text
//! wsp 1
//! steps 4
//! users 6
//! auth u1: s1
//! auth u2: s1 s2 s3 s4
//! eq s1 s2
//! ne s2 s3
//! atmost 3 s1 s2 s3 s4 s5
//! atleast 3 s1 s2 s3 s4 s5
//! ```
//!
//! `#` starts a comment. `wsp`, `steps` and `users` must precede every
//! other directive; users without an `auth` line have no authorizations.

use std::fmt::Write as _;

use super::{Constraint, ModelError, StepId, StepSet, UserId, WorkflowInstance, MAX_STEPS};

const FORMAT_VERSION: u32 = 1;

pub(crate) fn parse_step(tok: &str, k: usize) -> Result<StepId, ModelError> {
    let idx = parse_name(tok, 's')?;
    if idx >= k {
        return Err(ModelError::StepOutOfRange { index: idx, k });
    }
    Ok(StepId(idx as u32))
}

pub(crate) fn parse_user_name(tok: &str) -> Result<UserId, ModelError> {
    parse_name(tok, 'u').map(|i| UserId(i as u32))
}

/// `s3` -> 2.
fn parse_name(tok: &str, prefix: char) -> Result<usize, ModelError> {
    let bad = || ModelError::Syntax {
        line: 0,
        message: format!("expected `{prefix}N` with N >= 1, got `{tok}`"),
    };
    let digits = tok.strip_prefix(prefix).ok_or_else(bad)?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let n: usize = digits.parse().map_err(|_| bad())?;
    if n == 0 {
        return Err(bad());
    }
    Ok(n - 1)
}

fn parse_count(tok: Option<&str>, what: &str) -> Result<usize, String> {
    let tok = tok.ok_or_else(|| format!("missing {what}"))?;
    tok.parse::<usize>()
        .map_err(|_| format!("invalid {what} `{tok}`"))
}

fn parse_scope<'a>(toks: impl Iterator<Item = &'a str>, k: usize) -> Result<StepSet, ModelError> {
    let mut scope = StepSet::EMPTY;
    for tok in toks {
        let s = parse_step(tok, k)?;
        if scope.contains(s) {
            return Err(ModelError::Syntax {
                line: 0,
                message: format!("step {s} repeated in scope"),
            });
        }
        scope.insert(s);
    }
    Ok(scope)
}

pub fn parse_instance(text: &str) -> Result<WorkflowInstance, ModelError> {
    let mut version_seen = false;
    let mut k: Option<usize> = None;
    let mut n: Option<usize> = None;
    let mut auth: Vec<Option<StepSet>> = Vec::new();
    let mut constraints = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |message: String| ModelError::Syntax {
            line: lineno,
            message,
        };
        let mut toks = line.split_whitespace();
        let directive = toks.next().unwrap_or_default();

        match directive {
            "wsp" => {
                let v = parse_count(toks.next(), "format version").map_err(syntax)?;
                if v as u32 != FORMAT_VERSION {
                    return Err(syntax(format!("unsupported format version {v}")));
                }
                version_seen = true;
            }
            "steps" => {
                if k.is_some() {
                    return Err(syntax("duplicate `steps` directive".into()));
                }
                let v = parse_count(toks.next(), "step count").map_err(syntax)?;
                if v > MAX_STEPS {
                    return Err(ModelError::TooManySteps { k: v }.at_line(lineno));
                }
                k = Some(v);
            }
            "users" => {
                if n.is_some() {
                    return Err(syntax("duplicate `users` directive".into()));
                }
                let v = parse_count(toks.next(), "user count").map_err(syntax)?;
                n = Some(v);
                auth = vec![None; v];
            }
            _ => {
                let (Some(k), Some(n), true) = (k, n, version_seen) else {
                    return Err(syntax(format!(
                        "`{directive}` before the `wsp`, `steps` and `users` header"
                    )));
                };
                match directive {
                    "auth" => {
                        let who = toks
                            .next()
                            .ok_or_else(|| syntax("missing user in `auth`".into()))?;
                        let who = who
                            .strip_suffix(':')
                            .ok_or_else(|| syntax(format!("expected `uN:`, got `{who}`")))?;
                        let u = parse_user_name(who).map_err(|e| e.at_line(lineno))?;
                        if u.index() >= n {
                            return Err(ModelError::UserOutOfRange {
                                index: u.index(),
                                n,
                            }
                            .at_line(lineno));
                        }
                        if auth[u.index()].is_some() {
                            return Err(syntax(format!("duplicate `auth` line for {u}")));
                        }
                        let steps = parse_scope(toks, k).map_err(|e| e.at_line(lineno))?;
                        auth[u.index()] = Some(steps);
                    }
                    "ne" | "eq" => {
                        let pair: Vec<&str> = toks.collect();
                        if pair.len() != 2 {
                            return Err(syntax(format!("`{directive}` takes exactly two steps")));
                        }
                        let s = parse_step(pair[0], k).map_err(|e| e.at_line(lineno))?;
                        let t = parse_step(pair[1], k).map_err(|e| e.at_line(lineno))?;
                        let c = if directive == "ne" {
                            Constraint::NotEquals(s, t)
                        } else {
                            Constraint::Equals(s, t)
                        };
                        c.check_well_formed(k).map_err(|e| e.at_line(lineno))?;
                        constraints.push(c);
                    }
                    "atmost" | "atleast" => {
                        let r = parse_count(toks.next(), "threshold").map_err(syntax)?;
                        let scope = parse_scope(toks, k).map_err(|e| e.at_line(lineno))?;
                        let r =
                            u32::try_from(r).map_err(|_| syntax("threshold too large".into()))?;
                        let c = if directive == "atmost" {
                            Constraint::AtMost { r, scope }
                        } else {
                            Constraint::AtLeast { r, scope }
                        };
                        c.check_well_formed(k).map_err(|e| e.at_line(lineno))?;
                        constraints.push(c);
                    }
                    other => return Err(syntax(format!("unknown directive `{other}`"))),
                }
            }
        }
    }

    let missing = |what: &str| ModelError::Syntax {
        line: text.lines().count(),
        message: format!("missing `{what}` directive"),
    };
    if !version_seen {
        return Err(missing("wsp"));
    }
    let k = k.ok_or_else(|| missing("steps"))?;
    n.ok_or_else(|| missing("users"))?;
    let auth_by_user = auth.into_iter().map(Option::unwrap_or_default).collect();
    WorkflowInstance::new(k, auth_by_user, constraints)
}

fn write_scope(out: &mut String, scope: StepSet) {
    for s in scope {
        let _ = write!(out, " {s}");
    }
}

/// Canonical text form: header, one `auth` line per user, constraints in
/// instance order with ascending scopes.
pub fn serialize_instance(inst: &WorkflowInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "wsp {FORMAT_VERSION}");
    let _ = writeln!(out, "steps {}", inst.k());
    let _ = writeln!(out, "users {}", inst.n());
    for u in inst.users() {
        let _ = write!(out, "auth {u}:");
        write_scope(&mut out, inst.auth(u));
        out.push('\n');
    }
    for c in inst.constraints() {
        match *c {
            Constraint::NotEquals(s, t) => {
                let _ = writeln!(out, "ne {s} {t}");
            }
            Constraint::Equals(s, t) => {
                let _ = writeln!(out, "eq {s} {t}");
            }
            Constraint::AtMost { r, scope } => {
                let _ = write!(out, "atmost {r}");
                write_scope(&mut out, scope);
                out.push('\n');
            }
            Constraint::AtLeast { r, scope } => {
                let _ = write!(out, "atleast {r}");
                write_scope(&mut out, scope);
                out.push('\n');
            }
        }
    }
    out
}
