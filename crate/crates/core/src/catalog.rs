//! Named systems that can be used without an input file.

use crate::eqsys::{parse_system, ZSystem};
use crate::error::{Error, Result};

const SW: &str = "x1 - x2 - x3 + x4 = 0\nx1 - 2x3 + x5 = 0";
const S4AP: &str = "x1 - 2x2 + x3 = 0\nx2 - 2x3 + x4 = 0";
const S3AP: &str = "x1 - 2x2 + x3 = 0";
const SP: &str = "x1 - x2 - x3 + x4 = 0";
const SPP: &str = "x1 - x2 - x3 + x4 = 0\nx2 - x3 - x4 + x5 = 0";
const S1: &str =
    "x1 + x2 - x3 - x4 = 0\nx5 + x6 - 2x7 = 0\nx5 + x7 + x8 - 3x9 = 0\nx4 - 2x5 + x8 = 0";
const S2: &str = "x1 + x2 + x3 + x4 - 4x5 = 0\nx1 + x2 - x5 - x6 = 0\nx1 - 2x6 + x7 = 0";
const S3: &str = "x1 - x2 - x3 + x4 = 0\nx2 - x3 - x4 + x5 = 0\nx1 - 2x2 + x6 = 0";

fn builtin(text: &str) -> ZSystem {
    parse_system(text).expect("built-in system parses")
}

pub fn s_w() -> ZSystem {
    builtin(SW)
}

pub fn s_4ap() -> ZSystem {
    builtin(S4AP)
}

pub fn s_3ap() -> ZSystem {
    builtin(S3AP)
}

pub fn s_p() -> ZSystem {
    builtin(SP)
}

pub fn s_pp() -> ZSystem {
    builtin(SPP)
}

pub fn s1() -> ZSystem {
    builtin(S1)
}

pub fn s2() -> ZSystem {
    builtin(S2)
}

pub fn s3() -> ZSystem {
    builtin(S3)
}

/// `x_{2i-1} + x_{2i} = 2 x_{2k+1}` for `i = 1..k`.
pub fn star(k: usize) -> Result<ZSystem> {
    if k == 0 || 2 * k + 1 > crate::eqsys::MAX_VARIABLES {
        return Err(Error::InvalidArgument(format!(
            "STAR index {k} out of range"
        )));
    }
    let r = 2 * k + 1;
    let rows = (0..k)
        .map(|i| {
            let mut row = vec![0i64; r];
            row[2 * i] = 1;
            row[2 * i + 1] = 1;
            row[r - 1] = -2;
            row
        })
        .collect();
    ZSystem::from_rows(r, rows)
}

pub const NAMES: &[&str] = &["SW", "S4AP", "S3AP", "SP", "SPP", "S1", "S2", "S3", "STARk"];

/// Looks up a built-in by name (case-insensitive), e.g. `SW` or `STAR3`.
pub fn by_name(name: &str) -> Option<ZSystem> {
    let upper = name.to_ascii_uppercase();
    let s = match upper.as_str() {
        "SW" => s_w(),
        "S4AP" => s_4ap(),
        "S3AP" => s_3ap(),
        "SP" => s_p(),
        "SPP" => s_pp(),
        "S1" => s1(),
        "S2" => s2(),
        "S3" => s3(),
        other => {
            let k: usize = other.strip_prefix("STAR")?.parse().ok()?;
            return star(k).ok();
        }
    };
    Some(s)
}
