use std::collections::BTreeMap;
use std::path::Path;

use affine_kms::algebra::{AlgebraElement, Monomial, TermRecord};
use affine_kms::arith::PrimeSet;
use affine_kms::asymptotics::{FourierData, SequenceSpec};
use affine_kms::measures::{AtomicMeasure, MeasureDocument, RootOfUnity};
use affine_kms::states::{QzMonomial, StateSpec};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::{Failure, Options};

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Reads and decodes a JSON file, reporting syntax errors by line and column.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        usage(format!(
            "malformed JSON in {} at line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

pub fn read_measure(path: &Path) -> Result<AtomicMeasure, Failure> {
    let doc: MeasureDocument = read_json(path)?;
    doc.to_measure()
        .map_err(|e| usage(format!("invalid measure in {}: {e}", path.display())))
}

pub fn read_element(path: &Path) -> Result<AlgebraElement, Failure> {
    let records: Vec<TermRecord> = read_json(path)?;
    AlgebraElement::from_records(&records).map_err(|e| usage(format!("invalid element in {}: {e}", path.display())))
}

fn integer<T: std::str::FromStr>(what: &str, s: &str) -> Result<T, Failure> {
    s.trim()
        .parse()
        .map_err(|_| usage(format!("{what}: expected an integer, got `{s}`")))
}

/// `a,k,b`.
pub fn monomial(s: &str) -> Result<Monomial, Failure> {
    let parts: Vec<&str> = s.split(',').collect();
    let [a, k, b] = parts[..] else {
        return Err(usage(format!("monomial: expected `a,k,b`, got `{s}`")));
    };
    Monomial::new(integer("a", a)?, integer("k", k)?, integer("b", b)?).map_err(|e| usage(e.to_string()))
}

/// `a,p/q,b`.
pub fn qz_monomial(s: &str) -> Result<QzMonomial, Failure> {
    let parts: Vec<&str> = s.split(',').collect();
    let [a, x, b] = parts[..] else {
        return Err(usage(format!("monomial: expected `a,p/q,b`, got `{s}`")));
    };
    QzMonomial::new(integer("a", a)?, root(x)?, integer("b", b)?).map_err(|e| usage(e.to_string()))
}

/// `p/q` or `p`.
pub fn root(s: &str) -> Result<RootOfUnity, Failure> {
    s.trim()
        .parse()
        .map_err(|e: affine_kms::Error| usage(format!("root of unity `{s}`: {e}")))
}

/// Comma-separated primes.
pub fn primes(s: &str) -> Result<PrimeSet, Failure> {
    let values = if s.trim().is_empty() {
        Vec::new()
    } else {
        s.split(',')
            .map(|p| integer::<u64>("prime", p))
            .collect::<Result<Vec<_>, _>>()?
    };
    PrimeSet::new(values).map_err(|e| usage(e.to_string()))
}

/// `one`, `primes`, `squares`, or `@file.json` holding `[a_1, a_2, ...]`.
pub fn sequence(s: &str) -> Result<SequenceSpec, Failure> {
    let seq = match s {
        "one" => SequenceSpec::ConstOne,
        "primes" => SequenceSpec::PrimeIndicator,
        "squares" => SequenceSpec::SquareIndicator,
        _ => match s.strip_prefix('@') {
            Some(path) => SequenceSpec::Custom(read_json(Path::new(path))?),
            None => {
                return Err(usage(format!(
                    "sequence: expected one, primes, squares or @file, got `{s}`"
                )))
            }
        },
    };
    seq.validate().map_err(|e| usage(e.to_string()))?;
    Ok(seq)
}

#[derive(Deserialize)]
struct CoefficientRecord {
    m: i64,
    re: f64,
    #[serde(default)]
    im: f64,
}

/// `[{"m", "re", "im"}]`, the nonzero Fourier coefficients.
pub fn fourier_file(path: &Path) -> Result<FourierData, Failure> {
    let records: Vec<CoefficientRecord> = read_json(path)?;
    let mut map = BTreeMap::new();
    for r in records {
        if map.insert(r.m, Complex64::new(r.re, r.im)).is_some() {
            return Err(usage(format!("{}: coefficient {} given twice", path.display(), r.m)));
        }
    }
    let data = FourierData::Finite(map);
    data.validate().map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(data)
}

/// A state given as `family:key=value,...` or `@file.json`. Missing
/// parameters fall back to the global flags.
pub fn state(s: &str, opts: &Options) -> Result<StateSpec, Failure> {
    let spec = match s.strip_prefix('@') {
        Some(path) => read_json(Path::new(path))?,
        None => state_string(s, opts)?,
    };
    spec.validate().map_err(|e| usage(format!("state `{s}`: {e}")))?;
    Ok(spec)
}

fn state_string(s: &str, opts: &Options) -> Result<StateSpec, Failure> {
    let (family, rest) = s.split_once(':').unwrap_or((s, ""));
    let mut keys: BTreeMap<&str, &str> = BTreeMap::new();
    for pair in rest.split(',').filter(|p| !p.is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| usage(format!("state `{s}`: expected key=value, got `{pair}`")))?;
        if keys.insert(k.trim(), v.trim()).is_some() {
            return Err(usage(format!("state `{s}`: key `{k}` given twice")));
        }
    }
    let mut fields = Fields { state: s, keys, opts };
    let spec = match family {
        "finite" => StateSpec::FiniteN {
            n: fields.n()?,
            beta: fields.beta()?,
        },
        "lebesgue" => StateSpec::LebesgueInf { beta: fields.beta()? },
        "measure" => StateSpec::FromMeasure {
            nu: fields.measure()?,
            beta: fields.beta()?,
        },
        "low-temp" => StateSpec::LowTemp {
            eta: fields.measure()?,
            beta: fields.beta()?,
            truncation: fields.truncation()?,
        },
        "quotient" => StateSpec::Quotient {
            n: fields.n()?,
            m: fields.m()?,
            beta: fields.beta()?,
        },
        "quotient-char" => StateSpec::QuotientChar {
            n: fields.n()?,
            zeta: fields.root("zeta")?,
            beta: fields.beta()?,
            truncation: fields.truncation()?,
        },
        "qz-subgroup" => StateSpec::QzSubgroup {
            level: fields.level()?,
            m: fields.m()?,
            beta: fields.beta()?,
        },
        "qz-char" => StateSpec::QzChar {
            level: fields.level()?,
            chi: fields.root("chi")?,
            beta: fields.beta()?,
            truncation: fields.truncation()?,
        },
        _ => {
            return Err(usage(format!(
                "state `{s}`: unknown family `{family}` (expected finite, lebesgue, measure, low-temp, \
                 quotient, quotient-char, qz-subgroup or qz-char)"
            )))
        }
    };
    if let Some(extra) = fields.keys.keys().next() {
        return Err(usage(format!("state `{s}`: unexpected key `{extra}`")));
    }
    Ok(spec)
}

struct Fields<'a> {
    state: &'a str,
    keys: BTreeMap<&'a str, &'a str>,
    opts: &'a Options,
}

impl Fields<'_> {
    fn missing(&self, key: &str, flag: &str) -> Failure {
        usage(format!("state `{}` needs `{key}=` or {flag}", self.state))
    }

    fn number<T: std::str::FromStr>(&mut self, key: &str, fallback: Option<T>, flag: &str) -> Result<T, Failure> {
        match self.keys.remove(key) {
            Some(v) => v
                .parse()
                .map_err(|_| usage(format!("state `{}`: bad value `{v}` for `{key}`", self.state))),
            None => fallback.ok_or_else(|| self.missing(key, flag)),
        }
    }

    fn beta(&mut self) -> Result<f64, Failure> {
        self.number("beta", self.opts.beta, "--beta")
    }

    fn n(&mut self) -> Result<u64, Failure> {
        self.number("n", self.opts.n, "--n")
    }

    fn m(&mut self) -> Result<u64, Failure> {
        self.number("m", self.opts.subgroup, "--subgroup")
    }

    fn level(&mut self) -> Result<u64, Failure> {
        self.number("level", self.opts.level, "--level")
    }

    fn truncation(&mut self) -> Result<u64, Failure> {
        self.number("truncation", Some(self.opts.truncation), "--truncation")
    }

    fn root(&mut self, key: &str) -> Result<RootOfUnity, Failure> {
        let v = self.keys.remove(key).ok_or_else(|| self.missing(key, "a value"))?;
        root(v)
    }

    fn measure(&mut self) -> Result<AtomicMeasure, Failure> {
        let v = self
            .keys
            .remove("file")
            .ok_or_else(|| self.missing("file", "a measure file"))?;
        read_measure(Path::new(v))
    }
}
