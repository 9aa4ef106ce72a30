//! A minimal PV language and its grid semantics.
//!
//! ```text
//! program := { decl | proc }
//! decl    := "sem" IDENT INT ";"
//! proc    := "proc" IDENT "=" action { ";" action } ";"
//! action  := ("P" | "V") "(" IDENT ")"
//! ```
//!
//! `#` starts a comment that runs to the end of the line.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::precubical::{lattice_points, GridSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    P,
    V,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action {
    pub op: Op,
    pub sem: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Process {
    pub name: String,
    pub actions: Vec<Action>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PvProgram {
    /// Semaphore capacities.
    pub semaphores: BTreeMap<String, u32>,
    pub processes: Vec<Process>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u64),
    Semi,
    Eq,
    LParen,
    RParen,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn err<T>(line: usize, col: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        col,
        msg: msg.into(),
    })
}

fn lex(source: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    for (l, text) in source.lines().enumerate() {
        let line = l + 1;
        let chars: Vec<char> = text.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            let single = match c {
                ';' => Some(Tok::Semi),
                '=' => Some(Tok::Eq),
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                _ => None,
            };
            if let Some(tok) = single {
                out.push(Token { tok, line, col });
                i += 1;
            } else if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                let Ok(n) = digits.parse() else {
                    return err(line, col, format!("integer {digits} is too large"));
                };
                out.push(Token {
                    tok: Tok::Int(n),
                    line,
                    col,
                });
            } else if c.is_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    line,
                    col,
                });
            } else {
                return err(line, col, format!("unexpected character {c:?}"));
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map_or(self.end, |t| (t.line, t.col))
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token> {
        match self.peek() {
            Some(t) if t.tok == want => {
                let t = t.clone();
                self.pos += 1;
                Ok(t)
            }
            _ => {
                let (l, c) = self.here();
                err(l, c, format!("expected {what}"))
            }
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize, usize)> {
        match self.peek() {
            Some(Token {
                tok: Tok::Ident(s),
                line,
                col,
            }) => {
                let out = (s.clone(), *line, *col);
                self.pos += 1;
                Ok(out)
            }
            _ => {
                let (l, c) = self.here();
                err(l, c, format!("expected {what}"))
            }
        }
    }

    fn action(&mut self) -> Result<(Action, usize, usize)> {
        let (name, line, col) = self.ident("P or V")?;
        let op = match name.as_str() {
            "P" => Op::P,
            "V" => Op::V,
            _ => return err(line, col, format!("expected P or V, found {name:?}")),
        };
        self.expect(Tok::LParen, "'('")?;
        let (sem, _, _) = self.ident("a semaphore name")?;
        self.expect(Tok::RParen, "')'")?;
        Ok((Action { op, sem }, line, col))
    }
}

/// Parses a program and checks declarations and P/V discipline.
pub fn parse(source: &str) -> Result<PvProgram> {
    let toks = lex(source)?;
    let end = (
        source.lines().count().max(1),
        source.lines().last().map_or(0, |l| l.chars().count()) + 1,
    );
    let mut p = Parser { toks, pos: 0, end };
    let mut prog = PvProgram::default();
    let mut names = BTreeSet::new();
    while let Some(t) = p.peek().cloned() {
        let Tok::Ident(kw) = &t.tok else {
            return err(t.line, t.col, "expected 'sem' or 'proc'");
        };
        p.pos += 1;
        match kw.as_str() {
            "sem" => {
                let (name, line, col) = p.ident("a semaphore name")?;
                let cap = match p.peek() {
                    Some(Token {
                        tok: Tok::Int(n),
                        line,
                        col,
                    }) => {
                        if *n == 0 || *n > u32::MAX as u64 {
                            return err(*line, *col, "capacity must be a positive 32-bit integer");
                        }
                        *n as u32
                    }
                    _ => {
                        let (l, c) = p.here();
                        return err(l, c, "expected a capacity");
                    }
                };
                p.pos += 1;
                p.expect(Tok::Semi, "';'")?;
                if prog.semaphores.insert(name.clone(), cap).is_some() {
                    return err(line, col, format!("semaphore {name} declared twice"));
                }
            }
            "proc" => {
                let (name, line, col) = p.ident("a process name")?;
                if !names.insert(name.clone()) {
                    return err(line, col, format!("process {name} declared twice"));
                }
                p.expect(Tok::Eq, "'='")?;
                let mut actions = Vec::new();
                let mut held: BTreeMap<String, (usize, usize)> = BTreeMap::new();
                loop {
                    let (action, al, ac) = p.action()?;
                    if !prog.semaphores.contains_key(&action.sem) {
                        return err(al, ac, format!("undeclared semaphore {}", action.sem));
                    }
                    match action.op {
                        Op::P => {
                            if held.insert(action.sem.clone(), (al, ac)).is_some() {
                                return err(
                                    al,
                                    ac,
                                    format!("unbalanced P/V: P({}) while already held", action.sem),
                                );
                            }
                        }
                        Op::V => {
                            if held.remove(&action.sem).is_none() {
                                return err(
                                    al,
                                    ac,
                                    format!(
                                        "unbalanced P/V: V({}) without a matching P",
                                        action.sem
                                    ),
                                );
                            }
                        }
                    }
                    actions.push(action);
                    p.expect(Tok::Semi, "';'")?;
                    match p.peek() {
                        Some(Token {
                            tok: Tok::Ident(s), ..
                        }) if s == "P" || s == "V" => {}
                        _ => break,
                    }
                }
                if let Some((sem, (l, c))) = held.into_iter().next() {
                    return err(l, c, format!("unbalanced P/V: P({sem}) is never released"));
                }
                prog.processes.push(Process { name, actions });
            }
            other => {
                return err(
                    t.line,
                    t.col,
                    format!("expected 'sem' or 'proc', found {other:?}"),
                )
            }
        }
    }
    Ok(prog)
}

impl PvProgram {
    /// Hold intervals `(t_P, t_V)` of each semaphore for process `p`, with
    /// actions at times `1..=m`.
    fn holds(&self, p: usize) -> BTreeMap<&str, Vec<(u32, u32)>> {
        let mut open: BTreeMap<&str, u32> = BTreeMap::new();
        let mut out: BTreeMap<&str, Vec<(u32, u32)>> = BTreeMap::new();
        for (t, a) in self.processes[p].actions.iter().enumerate() {
            let t = t as u32 + 1;
            match a.op {
                Op::P => {
                    open.insert(&a.sem, t);
                }
                Op::V => {
                    let start = open.remove(a.sem.as_str()).expect("balanced program");
                    out.entry(&a.sem).or_default().push((start, t));
                }
            }
        }
        out
    }

    /// The grid model: one axis per process with its action count as extent; a
    /// top cell is forbidden when more processes than a semaphore's capacity
    /// hold it during the whole cell.
    pub fn semantics(&self) -> GridSpec {
        let extents: Vec<u32> = self
            .processes
            .iter()
            .map(|p| p.actions.len() as u32)
            .collect();
        let holds: Vec<_> = (0..self.processes.len()).map(|p| self.holds(p)).collect();
        let mut forbidden = BTreeSet::new();
        let limits: Vec<u32> = extents.iter().map(|m| m - 1).collect();
        for cell in lattice_points(&limits) {
            let blocked = self.semaphores.iter().any(|(sem, &cap)| {
                let holders = cell
                    .iter()
                    .enumerate()
                    .filter(|&(p, &j)| {
                        holds[p]
                            .get(sem.as_str())
                            .is_some_and(|iv| iv.iter().any(|&(a, b)| a <= j && j < b))
                    })
                    .count();
                holders > cap as usize
            });
            if blocked {
                forbidden.insert(cell);
            }
        }
        GridSpec { extents, forbidden }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precubical::build_grid;

    const MUTEX: &str = "sem a 1; proc p1 = P(a);V(a); proc p2 = P(a);V(a);";

    #[test]
    fn parses_mutex() {
        let prog = parse(MUTEX).unwrap();
        assert_eq!(prog.processes.len(), 2);
        assert_eq!(prog.semaphores["a"], 1);
        assert_eq!(
            prog.processes[0].actions[1],
            Action {
                op: Op::V,
                sem: "a".into()
            }
        );
        let spec = prog.semantics();
        assert_eq!(spec.extents, vec![2, 2]);
        assert_eq!(spec.forbidden, BTreeSet::from([vec![1, 1]]));
    }

    #[test]
    fn weak_synchronisation() {
        let prog = parse("sem a 2;\nproc p = P(a);V(a);\nproc q = P(a);V(a);\nproc r = P(a);V(a);")
            .unwrap();
        let spec = prog.semantics();
        assert_eq!(spec.extents, vec![2, 2, 2]);
        assert_eq!(spec.forbidden, BTreeSet::from([vec![1, 1, 1]]));
        assert!(build_grid(&spec).unwrap().is_proper());
    }

    #[test]
    fn degenerate_programs() {
        let prog = parse("# nothing here\nsem a 1;").unwrap();
        assert!(prog.processes.is_empty());
        assert!(prog.semantics().extents.is_empty());
        let one = parse("sem a 1; proc p = P(a); V(a); P(a); V(a);").unwrap();
        assert!(one.semantics().forbidden.is_empty());
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("sem a 2; proc p = P(a);P(a);").unwrap_err();
        assert!(
            matches!(
                e,
                Error::Parse {
                    line: 1,
                    col: 24,
                    ..
                }
            ),
            "{e}"
        );
        let e = parse("sem a 1;\nproc p = P(b);V(b);").unwrap_err();
        assert!(
            matches!(
                e,
                Error::Parse {
                    line: 2,
                    col: 10,
                    ..
                }
            ),
            "{e}"
        );
        let e = parse("sem a 1; proc p = P(a);").unwrap_err();
        assert!(e.to_string().contains("never released"));
        let e = parse("sem a 1; proc p = P(a) V(a);").unwrap_err();
        assert!(
            matches!(
                e,
                Error::Parse {
                    line: 1,
                    col: 24,
                    ..
                }
            ),
            "{e}"
        );
        assert!(parse("sem a 0;").is_err());
        assert!(parse("sem a 1; sem a 2;").is_err());
        assert!(parse("sem a 1; proc p = V(a);").is_err());
        assert!(parse("sem a 1; proc p = Q(a);").is_err());
        assert!(parse("sem a 1; proc p = P(a);V(a)").is_err());
        assert!(parse("sem a 1 $").is_err());
    }

    #[test]
    fn nested_semaphores() {
        let prog =
            parse("sem a 1; sem b 1; proc p = P(a);P(b);V(b);V(a); proc q = P(b);V(b);").unwrap();
        let spec = prog.semantics();
        assert_eq!(spec.extents, vec![4, 2]);
        // p holds b on cell 2, q on cell 1.
        assert_eq!(spec.forbidden, BTreeSet::from([vec![2, 1]]));
    }

    fn render(prog: &PvProgram) -> String {
        let mut out = String::new();
        for (name, cap) in &prog.semaphores {
            out += &format!("sem {name} {cap};\n");
        }
        for p in &prog.processes {
            let acts: Vec<String> = p
                .actions
                .iter()
                .map(|a| format!("{}({})", if a.op == Op::P { "P" } else { "V" }, a.sem))
                .collect();
            out += &format!("proc {} = {};\n", p.name, acts.join(";"));
        }
        out
    }

    fn arb_program() -> impl Strategy<Value = PvProgram> {
        let sems = ["a", "b"];
        let section = (0..2usize, 0..2usize).prop_map(move |(s, pad)| {
            let mut v = vec![
                Action {
                    op: Op::P,
                    sem: sems[s].into(),
                },
                Action {
                    op: Op::V,
                    sem: sems[s].into(),
                },
            ];
            if pad == 1 {
                v.insert(
                    1,
                    Action {
                        op: Op::P,
                        sem: sems[1 - s].into(),
                    },
                );
                v.insert(
                    2,
                    Action {
                        op: Op::V,
                        sem: sems[1 - s].into(),
                    },
                );
            }
            v
        });
        let process = proptest::collection::vec(section, 1..3).prop_map(|v| v.concat());
        (proptest::collection::vec(process, 1..4), 1..3u32, 1..3u32).prop_map(|(procs, ca, cb)| {
            PvProgram {
                semaphores: BTreeMap::from([("a".into(), ca), ("b".into(), cb)]),
                processes: procs
                    .into_iter()
                    .enumerate()
                    .map(|(i, actions)| Process {
                        name: format!("p{i}"),
                        actions,
                    })
                    .collect(),
            }
        })
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn render_round_trips(prog in arb_program()) {
            prop_assert_eq!(parse(&render(&prog)).unwrap(), prog);
        }

        #[test]
        fn forbidden_shrinks_with_capacity(prog in arb_program()) {
            let mut wider = prog.clone();
            for cap in wider.semaphores.values_mut() {
                *cap += 1;
            }
            let narrow = prog.semantics();
            let wide = wider.semantics();
            prop_assert_eq!(&narrow.extents, &wide.extents);
            prop_assert!(wide.forbidden.is_subset(&narrow.forbidden));
        }

        #[test]
        fn permuting_processes_permutes_axes(prog in arb_program(), rot in 0..3usize) {
            let n = prog.processes.len();
            let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
            let mut permuted = prog.clone();
            permuted.processes = perm.iter().map(|&i| prog.processes[i].clone()).collect();
            let a = prog.semantics();
            let b = permuted.semantics();
            let expected: BTreeSet<Vec<u32>> =
                a.forbidden.iter().map(|c| perm.iter().map(|&i| c[i]).collect()).collect();
            prop_assert_eq!(b.forbidden, expected);
            prop_assert!(build_grid(&a).is_ok());
        }
    }
}
