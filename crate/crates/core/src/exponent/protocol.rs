use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Cooperative protocol family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProtocolKind {
    Oaf,
    NsdfFixed,
    NsdfVariable,
    OsdfFixed,
    OsdfVariable,
    Naf,
    /// `n`-antenna point-to-point reference link.
    Miso,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 7] = [
        ProtocolKind::Oaf,
        ProtocolKind::NsdfFixed,
        ProtocolKind::NsdfVariable,
        ProtocolKind::OsdfFixed,
        ProtocolKind::OsdfVariable,
        ProtocolKind::Naf,
        ProtocolKind::Miso,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Oaf => "oaf",
            ProtocolKind::NsdfFixed => "nsdf-fixed",
            ProtocolKind::NsdfVariable => "nsdf-variable",
            ProtocolKind::OsdfFixed => "osdf-fixed",
            ProtocolKind::OsdfVariable => "osdf-variable",
            ProtocolKind::Naf => "naf",
            ProtocolKind::Miso => "miso",
        }
    }

    pub fn is_fixed_df(self) -> bool {
        matches!(self, ProtocolKind::NsdfFixed | ProtocolKind::OsdfFixed)
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s.to_ascii_lowercase().as_str() {
            "oaf" => ProtocolKind::Oaf,
            "nsdf" | "nsdf-fixed" => ProtocolKind::NsdfFixed,
            "nsdf-variable" => ProtocolKind::NsdfVariable,
            "osdf" | "osdf-fixed" => ProtocolKind::OsdfFixed,
            "osdf-variable" => ProtocolKind::OsdfVariable,
            "naf" => ProtocolKind::Naf,
            "miso" => ProtocolKind::Miso,
            other => return Err(Error::InvalidProtocol(format!("unknown protocol '{other}'"))),
        };
        Ok(kind)
    }
}

/// A protocol together with its node count and phase lengths.
///
/// `n` counts the source plus the `n - 1` relays (for `Miso`, the number of
/// transmit antennas). `p` and `q` are the channel uses of the broadcast and
/// relaying phases. They are taken as given, without gcd reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProtocolSpec {
    pub kind: ProtocolKind,
    pub n: usize,
    pub p: usize,
    pub q: usize,
}

impl ProtocolSpec {
    pub fn new(kind: ProtocolKind, n: usize, p: usize, q: usize) -> Result<Self> {
        let spec = ProtocolSpec { kind, n, p, q };
        spec.validate()?;
        Ok(spec)
    }

    /// The delay-optimal OAF protocol with `p = n`, `q = n - 1`.
    pub fn oaf(n: usize) -> Result<Self> {
        Self::new(ProtocolKind::Oaf, n, n, n.saturating_sub(1))
    }

    pub fn nsdf_fixed(n: usize, p: usize, q: usize) -> Result<Self> {
        Self::new(ProtocolKind::NsdfFixed, n, p, q)
    }

    pub fn osdf_fixed(n: usize, p: usize, q: usize) -> Result<Self> {
        Self::new(ProtocolKind::OsdfFixed, n, p, q)
    }

    /// NAF over `n - 1` two-use frames: `p = q = n - 1`.
    pub fn naf(n: usize) -> Result<Self> {
        Self::new(ProtocolKind::Naf, n, n.saturating_sub(1), n.saturating_sub(1))
    }

    pub fn miso(n: usize) -> Result<Self> {
        Self::new(ProtocolKind::Miso, n, 1, 0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidProtocol(msg));
        match self.kind {
            ProtocolKind::Miso => {
                if self.n < 1 {
                    return bad("MISO needs at least one antenna".into());
                }
                return Ok(());
            }
            _ if self.n < 2 => return bad(format!("n = {} but at least one relay (n >= 2) is required", self.n)),
            _ => {}
        }
        match self.kind {
            ProtocolKind::NsdfFixed | ProtocolKind::OsdfFixed => {
                if self.q < 1 {
                    return bad("q must be at least 1".into());
                }
                if self.p < self.q {
                    return bad(format!("p = {} < q = {}; only p >= q is supported", self.p, self.q));
                }
            }
            ProtocolKind::Oaf => {
                if self.p < 1 {
                    return bad("p must be at least 1".into());
                }
            }
            ProtocolKind::Naf if self.p != self.n - 1 || self.q != self.n - 1 => {
                return bad("NAF frames use p = q = n - 1".into());
            }
            _ => {}
        }
        Ok(())
    }

    /// Total channel uses of one frame, `m = p + q`.
    pub fn m(&self) -> usize {
        self.p + self.q
    }

    /// Number of relays.
    pub fn relays(&self) -> usize {
        self.n.saturating_sub(1)
    }
}
