use std::io::Write;

use sha2::{Digest, Sha256};

use crate::adversary::Strategy;
use crate::blocktree::WeightCoefficient;
use crate::mining::ProtocolParams;

/// One row of a property-check CSV.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckRecord {
    pub check: String,
    pub params_digest: String,
    pub pass: bool,
    pub first_violation_round: Option<u64>,
    pub detail: String,
}

/// Short stable digest identifying a parameter set.
pub fn params_digest(
    params: &ProtocolParams,
    coeff: &WeightCoefficient,
    strategy: &Strategy,
) -> String {
    let canon = format!(
        "n={};t={};p={:e};q={};eps={:e};lambda={};c={};adv={:?}",
        params.n, params.t, params.p, params.q, params.epsilon, params.lambda, coeff, strategy
    );
    let hash = Sha256::digest(canon.as_bytes());
    hash[..8].iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_check_csv<W: Write>(writer: W, records: &[CheckRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "check_name",
        "params_digest",
        "pass",
        "first_violation_round",
        "detail",
    ])?;
    for r in records {
        let first = r
            .first_violation_round
            .map(|x| x.to_string())
            .unwrap_or_default();
        w.write_record([
            r.check.as_str(),
            &r.params_digest,
            if r.pass { "true" } else { "false" },
            &first,
            &r.detail,
        ])?;
    }
    w.flush()?;
    Ok(())
}
