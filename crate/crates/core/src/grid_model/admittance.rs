use serde::{Deserialize, Serialize};

use super::per_unit::PerUnitSystem;
use super::records::{CurrentKind, Line, Transformer};
use crate::error::{Error, Result};

/// A branch whose series impedance enters the bus balances.
#[derive(Debug, Clone, Copy)]
pub enum BranchRecord<'a> {
    Line(&'a Line),
    /// Transformer together with its position in the network's transformer
    /// table, needed to look up the winding its impedance is referred to.
    Transformer(usize, &'a Transformer),
}

/// Series impedance in ohms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchImpedance {
    pub r: f64,
    pub x: f64,
}

impl BranchImpedance {
    pub fn magnitude(&self) -> f64 {
        self.r.hypot(self.x)
    }

    /// `(Re(1/z), Im(1/z))`.
    pub fn inverse(&self) -> Result<(f64, f64)> {
        let m2 = self.r * self.r + self.x * self.x;
        if m2 == 0.0 || !m2.is_finite() {
            return Err(Error::PerUnit(format!(
                "branch impedance |z| = {} cannot be inverted",
                m2.sqrt()
            )));
        }
        Ok((self.r / m2, -self.x / m2))
    }
}

/// Per-unit branch admittance: `c + j·s` is the series admittance and
/// `b_shunt` the total line charging, split half to each end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchAdmittance {
    pub c: f64,
    pub s: f64,
    pub b_shunt: f64,
}

/// Physical series impedance of a line (reactance ignored on DC lines).
pub fn line_impedance(line: &Line) -> BranchImpedance {
    let x = match line.kind {
        CurrentKind::Ac => line.x_per_km.unwrap_or(0.0),
        CurrentKind::Dc => 0.0,
    };
    BranchImpedance {
        r: line.r_per_km * line.length_km,
        x: x * line.length_km,
    }
}

/// Physical series impedance of a transformer, referred to its `v_ln`
/// winding, from its short-circuit test voltages.
pub fn transformer_impedance(t: &Transformer) -> Result<BranchImpedance> {
    if t.v_rccl_pct > t.v_ccl_pct {
        return Err(Error::PerUnit(format!(
            "transformer {}: v_rccl_pct {} exceeds v_ccl_pct {} (imaginary reactance)",
            t.id, t.v_rccl_pct, t.v_ccl_pct
        )));
    }
    // kV² · 1000 / kVA = Ω
    let scale = t.v_ln * t.v_ln * 1000.0 / (100.0 * t.s_n);
    let z = t.v_ccl_pct * scale;
    let r = t.v_rccl_pct * scale;
    Ok(BranchImpedance {
        r,
        x: (z * z - r * r).sqrt(),
    })
}

/// Per-unit admittance of a line or transformer, on the voltage base of the
/// branch's reference bus (the `from` bus for lines, the `v_ln` winding for
/// transformers). Takes the record in physical units.
pub fn branch_admittance(record: BranchRecord<'_>, pu: &PerUnitSystem) -> Result<BranchAdmittance> {
    match record {
        BranchRecord::Line(line) => {
            let z_base = pu.z_base(line.from)?;
            let (c, s) = line_impedance(line).inverse()?;
            let b_shunt = match line.kind {
                CurrentKind::Ac => {
                    let farads = line.c_per_km.unwrap_or(0.0) * 1e-9 * line.length_km;
                    pu.omega * farads * z_base
                }
                CurrentKind::Dc => 0.0,
            };
            Ok(BranchAdmittance {
                c: c * z_base,
                s: s * z_base,
                b_shunt,
            })
        }
        BranchRecord::Transformer(index, t) => {
            let reference = pu.transformer_reference(index)?;
            let z_base = pu.z_base(reference)?;
            let (c, s) = transformer_impedance(t)?.inverse()?;
            Ok(BranchAdmittance {
                c: c * z_base,
                s: s * z_base,
                b_shunt: 0.0,
            })
        }
    }
}
