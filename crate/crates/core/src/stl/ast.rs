use std::fmt;

/// Closed time interval `[a, b]`, in seconds, relative to the evaluation instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn new(start: f64, end: f64) -> Option<Self> {
        (start.is_finite() && end.is_finite() && 0.0 <= start && start <= end)
            .then_some(Self { start, end })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Comparator {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
        }
    }
}

/// `constant + Σ coeff·signal`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AffineExpr {
    pub terms: Vec<(String, f64)>,
    pub constant: f64,
}

impl AffineExpr {
    pub fn constant(c: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn signal(name: impl Into<String>) -> Self {
        Self {
            terms: vec![(name.into(), 1.0)],
            constant: 0.0,
        }
    }

    pub fn scale(mut self, k: f64) -> Self {
        self.constant *= k;
        for (_, c) in &mut self.terms {
            *c *= k;
        }
        self
    }

    /// `self + k·other`, merging coefficients of repeated signals.
    pub fn add_scaled(mut self, other: AffineExpr, k: f64) -> Self {
        self.constant += k * other.constant;
        for (name, c) in other.terms {
            match self.terms.iter_mut().find(|(n, _)| *n == name) {
                Some((_, existing)) => *existing += k * c,
                None => self.terms.push((name, k * c)),
            }
        }
        self
    }

    pub fn as_constant(&self) -> Option<f64> {
        self.terms.is_empty().then_some(self.constant)
    }
}

impl fmt::Display for AffineExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, c) in &self.terms {
            let (sign, mag) = if *c < 0.0 { ("-", -c) } else { ("+", *c) };
            if first {
                if sign == "-" {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if mag == 1.0 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{mag}*{name}")?;
            }
            first = false;
        }
        if first {
            write!(f, "{}", self.constant)
        } else if self.constant != 0.0 {
            let sign = if self.constant < 0.0 { "-" } else { "+" };
            write!(f, " {sign} {}", self.constant.abs())
        } else {
            Ok(())
        }
    }
}

/// `lhs ▷ rhs`, evaluated as a signed margin.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub lhs: AffineExpr,
    pub cmp: Comparator,
    pub rhs: AffineExpr,
}

impl Atom {
    /// Positive when satisfied: `lhs - rhs` for `>`/`>=`, `rhs - lhs` for `<`/`<=`.
    pub fn margin_expr(&self) -> AffineExpr {
        match self.cmp {
            Comparator::Gt | Comparator::Ge => self.lhs.clone().add_scaled(self.rhs.clone(), -1.0),
            Comparator::Lt | Comparator::Le => self.rhs.clone().add_scaled(self.lhs.clone(), -1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Always(Interval, Box<Formula>),
    Eventually(Interval, Box<Formula>),
    Until(Interval, Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(lhs: AffineExpr, cmp: Comparator, rhs: AffineExpr) -> Self {
        Formula::Atom(Atom { lhs, cmp, rhs })
    }

    /// Length of the time window the formula looks ahead from its
    /// evaluation instant.
    pub fn horizon(&self) -> f64 {
        match self {
            Formula::Atom(_) => 0.0,
            Formula::Not(f) => f.horizon(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.horizon().max(b.horizon())
            }
            Formula::Always(i, f) | Formula::Eventually(i, f) => i.end + f.horizon(),
            Formula::Until(i, a, b) => i.end + a.horizon().max(b.horizon()),
        }
    }

    /// Names of every signal referenced by an atom.
    pub fn signals(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_signals(&mut out);
        out
    }

    fn collect_signals(&self, out: &mut Vec<String>) {
        match self {
            Formula::Atom(a) => {
                for (n, _) in a.lhs.terms.iter().chain(&a.rhs.terms) {
                    if !out.contains(n) {
                        out.push(n.clone());
                    }
                }
            }
            Formula::Not(f) | Formula::Always(_, f) | Formula::Eventually(_, f) => {
                f.collect_signals(out)
            }
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Until(_, a, b) => {
                a.collect_signals(out);
                b.collect_signals(out);
            }
        }
    }
}

/// Maximum nesting-sum of interval upper bounds.
pub fn horizon_of(f: &Formula) -> f64 {
    f.horizon()
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "({} {} {})", a.lhs, a.cmp.symbol(), a.rhs),
            Formula::Not(x) => write!(f, "not {x}"),
            Formula::And(a, b) => write!(f, "({a} and {b})"),
            Formula::Or(a, b) => write!(f, "({a} or {b})"),
            Formula::Implies(a, b) => write!(f, "({a} -> {b})"),
            Formula::Always(i, x) => write!(f, "alw[{},{}] {x}", i.start, i.end),
            Formula::Eventually(i, x) => write!(f, "ev[{},{}] {x}", i.start, i.end),
            Formula::Until(i, a, b) => write!(f, "({a} U[{},{}] {b})", i.start, i.end),
        }
    }
}
