//! Recursive-descent parser producing templates, rules, and the initial
//! process.

use crate::diagnostics::{Diagnostic, Span};
use crate::process::{Atom, Process, CONNECTOR};
use crate::syntax::lexer::{tokenize, Tok, Token};
use crate::template::{
    Bound, ContextRef, FreshNamer, Label, QuantKind, Quantifier, QuantifiedPart, Rule, TMembrane,
    Template,
};

/// Parsed program: initial process, rules in source order, and the name
/// generator primed so that later fresh names stay disjoint from both the
/// source and the names minted while expanding term notation.
#[derive(Debug, Clone)]
pub struct SourceProgram {
    pub rules: Vec<Rule>,
    pub init: Process,
    pub namer: FreshNamer,
}

pub fn parse_program(src: &str) -> Result<SourceProgram, Diagnostic> {
    let tokens = tokenize(src)?;
    let mut p = Parser {
        src,
        tokens,
        pos: 0,
        namer: FreshNamer::new(),
    };
    let mut rules = Vec::new();
    let mut init = Process::empty();
    while p.peek() != &Tok::Eof {
        let start_offset = p.tokens[p.pos].offset;
        let start_span = p.tokens[p.pos].span;
        let head = p.template()?;
        match p.peek().clone() {
            Tok::Dot => {
                p.bump();
                let ground = head.into_process().ok_or_else(|| Diagnostic::NotGround {
                    span: start_span,
                    what: "quantifiers or process contexts".into(),
                })?;
                init = init.glue(ground).map_err(|d| match d {
                    Diagnostic::LinkCondition { link, count, detail, .. } => {
                        Diagnostic::LinkCondition {
                            link,
                            count,
                            place: "in the initial process".into(),
                            detail,
                        }
                    }
                    other => other,
                })?;
            }
            Tok::Turnstile => {
                p.bump();
                let body = p.template()?;
                let end_offset = p.tokens[p.pos].offset;
                p.expect(Tok::Dot, "`.` after rule body")?;
                let raw = &src[start_offset..end_offset];
                let text = raw.split_whitespace().collect::<Vec<_>>().join(" ");
                rules.push(Rule { head, body, text });
            }
            other => {
                return Err(p.err(format!("expected `.` or `:-`, found {}", show(&other))));
            }
        }
    }
    init.validate_link_condition().map_err(|d| match d {
        Diagnostic::LinkCondition { link, count, detail, .. } => Diagnostic::LinkCondition {
            link,
            count,
            place: "in the initial process".into(),
            detail,
        },
        other => other,
    })?;
    Ok(SourceProgram {
        rules,
        init,
        namer: p.namer,
    })
}

/// Parses a single process, for inputs that are one ground term (used by
/// the congruence checker and tests).
pub fn parse_process(src: &str) -> Result<Process, Diagnostic> {
    let program = parse_program(src)?;
    if !program.rules.is_empty() {
        return Err(Diagnostic::Syntax {
            span: Span::default(),
            message: "expected a process, found a rule".into(),
        });
    }
    Ok(program.init)
}

struct Parser<'a> {
    #[allow(dead_code)]
    src: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    namer: FreshNamer,
}

/// Term-notation tree: `p(a, X)` before flattening into atoms.
enum TermTree {
    Link(String),
    Term { name: String, args: Vec<TermTree> },
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.tokens[(self.pos + 1).min(self.tokens.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, message: String) -> Diagnostic {
        Diagnostic::Syntax {
            span: self.span(),
            message,
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), Diagnostic> {
        if self.peek() == &tok {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected {what}, found {}", show(self.peek()))))
        }
    }

    /// template := elem (`,` elem)*
    fn template(&mut self) -> Result<Template, Diagnostic> {
        let mut t = Template::default();
        loop {
            let elem = self.elem()?;
            t.extend(elem);
            if self.peek() == &Tok::Comma {
                self.bump();
            } else {
                return Ok(t);
            }
        }
    }

    /// One element: membrane, group, context, quantified element, atom
    /// term, connector, or `0`.
    fn elem(&mut self) -> Result<Template, Diagnostic> {
        match self.peek().clone() {
            Tok::LBrace => {
                self.bump();
                let content = if self.peek() == &Tok::RBrace {
                    Template::default()
                } else {
                    self.template()?
                };
                self.expect(Tok::RBrace, "`}`")?;
                let mut t = Template::default();
                t.membranes.push(TMembrane::new(content));
                Ok(t)
            }
            Tok::LParen => {
                self.bump();
                let inner = self.template()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Dollar => {
                self.bump();
                let name = match self.bump() {
                    Tok::Lower(s) | Tok::Number(s) => s,
                    other => {
                        return Err(self.err(format!(
                            "expected a context name after `$`, found {}",
                            show(&other)
                        )))
                    }
                };
                let mut t = Template::default();
                t.contexts.push(ContextRef { name });
                Ok(t)
            }
            Tok::Lt => {
                let quant = self.quantifier(Label::Empty)?;
                self.quantified(quant)
            }
            Tok::Upper(name) => {
                match self.peek2().clone() {
                    Tok::Lt => {
                        self.bump();
                        let quant = self.quantifier(Label::Named(name))?;
                        self.quantified(quant)
                    }
                    Tok::Eq => {
                        // X = <operand>
                        self.bump();
                        self.bump();
                        let right = self.term_or_link()?;
                        let mut t = Template::default();
                        self.emit_connector(TermTree::Link(name), right, &mut t);
                        Ok(t)
                    }
                    _ => Err(self.err(format!(
                        "link {name} cannot stand alone; expected a quantifier `<...>` or `= ...`"
                    ))),
                }
            }
            Tok::Lower(_) | Tok::Number(_) => {
                let term = self.term_or_link()?;
                if self.peek() == &Tok::Eq {
                    self.bump();
                    let right = self.term_or_link()?;
                    let mut t = Template::default();
                    self.emit_connector(term, right, &mut t);
                    return Ok(t);
                }
                match term {
                    TermTree::Link(name) => Err(self.err(format!(
                        "link {name} cannot stand alone; expected a quantifier `<...>` or `= ...`"
                    ))),
                    // A bare `0` is the null process.
                    TermTree::Term { name, args } if name == "0" && args.is_empty() => {
                        Ok(Template::default())
                    }
                    TermTree::Term { name, args } => {
                        let mut t = Template::default();
                        self.emit_term(name, args, None, &mut t);
                        Ok(t)
                    }
                }
            }
            other => Err(self.err(format!("expected an element, found {}", show(&other)))),
        }
    }

    /// `<z>`, `<z1,z2>`, `<z,>`, `<?>`, `<^>`, `<*>`, `<+>` after an
    /// optional label (already consumed by the caller).
    fn quantifier(&mut self, label: Label) -> Result<Quantifier, Diagnostic> {
        self.expect(Tok::Lt, "`<`")?;
        let kind = match self.bump() {
            Tok::Caret => QuantKind::NonExist,
            Tok::Star => QuantKind::Star,
            Tok::Plus => QuantKind::Plus,
            Tok::Question => QuantKind::Card {
                lo: 0,
                hi: Bound::Infinite,
            },
            Tok::Number(z1) => {
                let lo: i64 = z1
                    .parse()
                    .map_err(|_| self.err(format!("bound {z1} out of range")))?;
                match self.peek().clone() {
                    Tok::Gt => QuantKind::Card {
                        lo,
                        hi: Bound::Finite(lo),
                    },
                    Tok::Comma => {
                        self.bump();
                        match self.peek().clone() {
                            Tok::Gt => QuantKind::Card {
                                lo,
                                hi: Bound::Infinite,
                            },
                            Tok::Number(z2) => {
                                self.bump();
                                let hi: i64 = z2
                                    .parse()
                                    .map_err(|_| self.err(format!("bound {z2} out of range")))?;
                                QuantKind::Card {
                                    lo,
                                    hi: Bound::Finite(hi),
                                }
                            }
                            other => {
                                return Err(self.err(format!(
                                    "expected an upper bound or `>`, found {}",
                                    show(&other)
                                )))
                            }
                        }
                    }
                    other => {
                        return Err(self.err(format!(
                            "expected `,` or `>` in quantifier, found {}",
                            show(&other)
                        )))
                    }
                }
            }
            other => {
                return Err(self.err(format!(
                    "expected `^`, `*`, `+`, `?`, or a bound, found {}",
                    show(&other)
                )))
            }
        };
        self.expect(Tok::Gt, "`>` closing the quantifier")?;
        Ok(Quantifier { label, kind })
    }

    /// A quantifier binds tighter than `,`: its template is the next
    /// single element (which may itself be quantified or parenthesized).
    fn quantified(&mut self, quant: Quantifier) -> Result<Template, Diagnostic> {
        let body = self.elem()?;
        let mut t = Template::default();
        t.quantified.push(QuantifiedPart {
            quant,
            body,
            settled: false,
        });
        Ok(t)
    }

    /// Operand of `=` or a standalone atom: a link or a term.
    fn term_or_link(&mut self) -> Result<TermTree, Diagnostic> {
        match self.bump() {
            Tok::Upper(name) => Ok(TermTree::Link(name)),
            Tok::Lower(name) | Tok::Number(name) => {
                let mut args = Vec::new();
                if self.peek() == &Tok::LParen {
                    self.bump();
                    loop {
                        args.push(self.term_or_link()?);
                        match self.bump() {
                            Tok::Comma => continue,
                            Tok::RParen => break,
                            other => {
                                return Err(self.err(format!(
                                    "expected `,` or `)` in argument list, found {}",
                                    show(&other)
                                )))
                            }
                        }
                    }
                }
                Ok(TermTree::Term { name, args })
            }
            other => Err(self.err(format!(
                "expected a link or an atom, found {}",
                show(&other)
            ))),
        }
    }

    /// Flattens term notation: every term argument becomes its own atom
    /// whose last port carries a fresh link back to the argument position.
    fn emit_term(
        &mut self,
        name: String,
        args: Vec<TermTree>,
        extra: Option<String>,
        out: &mut Template,
    ) {
        let mut ports = Vec::new();
        for arg in args {
            match arg {
                TermTree::Link(l) => ports.push(l),
                TermTree::Term { name, args } => {
                    let link = self.namer.fresh("T");
                    self.emit_term(name, args, Some(link.clone()), out);
                    ports.push(link);
                }
            }
        }
        if let Some(link) = extra {
            ports.push(link);
        }
        out.atoms.push(Atom::new(name, ports));
    }

    /// `t1 = t2` is the binary connector atom; term operands expand like
    /// any other term argument.
    fn emit_connector(&mut self, left: TermTree, right: TermTree, out: &mut Template) {
        let l = self.connector_port(left, out);
        let r = self.connector_port(right, out);
        out.atoms.push(Atom::new(CONNECTOR, vec![l, r]));
    }

    fn connector_port(&mut self, tree: TermTree, out: &mut Template) -> String {
        match tree {
            TermTree::Link(l) => l,
            TermTree::Term { name, args } => {
                let link = self.namer.fresh("T");
                self.emit_term(name, args, Some(link.clone()), out);
                link
            }
        }
    }
}

fn show(tok: &Tok) -> String {
    match tok {
        Tok::Lower(s) | Tok::Upper(s) | Tok::Number(s) => format!("`{s}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::LBrace => "`{`".into(),
        Tok::RBrace => "`}`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Dot => "`.`".into(),
        Tok::Turnstile => "`:-`".into(),
        Tok::Dollar => "`$`".into(),
        Tok::Lt => "`<`".into(),
        Tok::Gt => "`>`".into(),
        Tok::Caret => "`^`".into(),
        Tok::Star => "`*`".into(),
        Tok::Plus => "`+`".into(),
        Tok::Question => "`?`".into(),
        Tok::Eq => "`=`".into(),
        Tok::Eof => "end of input".into(),
    }
}
