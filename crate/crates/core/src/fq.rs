//! Small matrices and vectors over a prime field `F_q`.

use std::fmt;

use crate::error::{domain, Error, Result};

/// Square matrix over `F_q`, row-major, entries in `0..q`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FqMatrix {
    n: usize,
    q: u8,
    e: Vec<u8>,
}

impl FqMatrix {
    pub fn new(n: usize, q: u8, entries: Vec<u8>) -> Result<Self> {
        if !matches!(q, 2 | 3 | 5 | 7) {
            return Err(domain(format!("field size {q} is not a supported prime")));
        }
        if entries.len() != n * n {
            return Err(domain(format!(
                "expected {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        Ok(FqMatrix {
            n,
            q,
            e: entries.into_iter().map(|x| x % q).collect(),
        })
    }

    pub fn from_signed(n: usize, q: u8, entries: &[i64]) -> Result<Self> {
        let qi = i64::from(q);
        FqMatrix::new(
            n,
            q,
            entries.iter().map(|&x| x.rem_euclid(qi) as u8).collect(),
        )
    }

    pub fn identity(n: usize, q: u8) -> Self {
        let mut e = vec![0u8; n * n];
        for i in 0..n {
            e[i * n + i] = 1;
        }
        FqMatrix { n, q, e }
    }

    /// `I + c E_ij`.
    pub fn elementary(n: usize, q: u8, i: usize, j: usize, c: u8) -> Self {
        let mut m = FqMatrix::identity(n, q);
        m.e[i * n + j] = (m.e[i * n + j] + c) % q;
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }
    pub fn q(&self) -> u8 {
        self.q
    }
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.e[i * self.n + j]
    }
    pub fn entries(&self) -> &[u8] {
        &self.e
    }
    pub fn is_identity(&self) -> bool {
        *self == FqMatrix::identity(self.n, self.q)
    }

    pub fn mul(&self, other: &FqMatrix) -> FqMatrix {
        let (n, q) = (self.n, u32::from(self.q));
        let mut e = vec![0u8; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0u32;
                for k in 0..n {
                    acc += u32::from(self.e[i * n + k]) * u32::from(other.e[k * n + j]);
                }
                e[i * n + j] = (acc % q) as u8;
            }
        }
        FqMatrix { n, q: self.q, e }
    }

    pub fn transpose(&self) -> FqMatrix {
        let n = self.n;
        let e = (0..n * n).map(|k| self.e[(k % n) * n + k / n]).collect();
        FqMatrix { n, q: self.q, e }
    }

    pub fn det(&self) -> u8 {
        let (n, q) = (self.n, self.q);
        let mut m = self.e.clone();
        let mut det = 1u32;
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| m[r * n + col] != 0) else {
                return 0;
            };
            if piv != col {
                for c in 0..n {
                    m.swap(piv * n + c, col * n + c);
                }
                det = det * u32::from(q - 1) % u32::from(q);
            }
            let p = m[col * n + col];
            det = det * u32::from(p) % u32::from(q);
            let pinv = inv_mod(p, q);
            for r in col + 1..n {
                let f = mul_mod(m[r * n + col], pinv, q);
                if f == 0 {
                    continue;
                }
                for c in col..n {
                    m[r * n + c] = sub_mod(m[r * n + c], mul_mod(f, m[col * n + c], q), q);
                }
            }
        }
        det as u8
    }

    pub fn inverse(&self) -> Result<FqMatrix> {
        let (n, q) = (self.n, self.q);
        let mut a = self.e.clone();
        let mut b = FqMatrix::identity(n, q).e;
        for col in 0..n {
            let piv = (col..n)
                .find(|&r| a[r * n + col] != 0)
                .ok_or_else(|| domain("matrix is singular"))?;
            for c in 0..n {
                a.swap(piv * n + c, col * n + c);
                b.swap(piv * n + c, col * n + c);
            }
            let pinv = inv_mod(a[col * n + col], q);
            for c in 0..n {
                a[col * n + c] = mul_mod(a[col * n + c], pinv, q);
                b[col * n + c] = mul_mod(b[col * n + c], pinv, q);
            }
            for r in 0..n {
                if r == col || a[r * n + col] == 0 {
                    continue;
                }
                let f = a[r * n + col];
                for c in 0..n {
                    a[r * n + c] = sub_mod(a[r * n + c], mul_mod(f, a[col * n + c], q), q);
                    b[r * n + c] = sub_mod(b[r * n + c], mul_mod(f, b[col * n + c], q), q);
                }
            }
        }
        Ok(FqMatrix { n, q, e: b })
    }

    /// Matrix times column vector.
    pub fn apply(&self, v: &[u8]) -> Vec<u8> {
        let (n, q) = (self.n, u32::from(self.q));
        (0..n)
            .map(|i| {
                ((0..n)
                    .map(|k| u32::from(self.e[i * n + k]) * u32::from(v[k]))
                    .sum::<u32>()
                    % q) as u8
            })
            .collect()
    }

    /// Parses whitespace-separated rows; `-1` style negative entries are
    /// reduced modulo `q`.
    pub fn parse(text: &str, q: u8) -> Result<Self> {
        let rows: Vec<Vec<i64>> = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, l)| {
                l.split_whitespace()
                    .map(|t| {
                        t.parse::<i64>().map_err(|_| Error::Parse {
                            line: i + 1,
                            msg: format!("bad entry {t:?}"),
                        })
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Parse {
                line: 1,
                msg: "matrix is not square".into(),
            });
        }
        FqMatrix::from_signed(n, q, &rows.concat())
    }
}

impl fmt::Debug for FqMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.n {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}

pub(crate) fn mul_mod(a: u8, b: u8, q: u8) -> u8 {
    ((u32::from(a) * u32::from(b)) % u32::from(q)) as u8
}

pub(crate) fn add_mod(a: u8, b: u8, q: u8) -> u8 {
    ((u32::from(a) + u32::from(b)) % u32::from(q)) as u8
}

pub(crate) fn sub_mod(a: u8, b: u8, q: u8) -> u8 {
    ((u32::from(a) + u32::from(q) - u32::from(b)) % u32::from(q)) as u8
}

pub(crate) fn inv_mod(a: u8, q: u8) -> u8 {
    (1..q)
        .find(|&b| mul_mod(a, b, q) == 1)
        .expect("non-zero element of a prime field")
}

/// Encodes a vector as an integer, first coordinate most significant.
pub fn encode(v: &[u8], q: u8) -> u32 {
    v.iter()
        .fold(0u32, |acc, &x| acc * u32::from(q) + u32::from(x))
}

pub fn decode(mut code: u32, n: usize, q: u8) -> Vec<u8> {
    let mut v = vec![0u8; n];
    for i in (0..n).rev() {
        v[i] = (code % u32::from(q)) as u8;
        code /= u32::from(q);
    }
    v
}
