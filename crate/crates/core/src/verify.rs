//! Confronts the closed-form predictions with the enumerated graph: the
//! component multiset, every state's pre-period and period, and the
//! in-degree law of the convergent-tree case.

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{
    classify, predict_period_for, predict_structure_for, repeated_root_period, CaseLabel,
    GraphStructure, StructurePrediction,
};
use crate::enumerator::build_graph;
use crate::error::Error;
use crate::iprng::{Params, PeriodInfo};
use crate::ring::Modulus;

/// Check periods at every state up to this size, sample beyond it.
const PERIOD_EXHAUSTIVE_LIMIT: u64 = 10_000;
const PERIOD_SAMPLE: u64 = 1_000;

/// One state whose measured orbit disagrees with the prediction.
#[derive(Clone, Debug, Serialize)]
pub struct PeriodMismatch {
    pub x0: u64,
    pub predicted: PeriodInfo,
    pub measured: PeriodInfo,
}

/// Outcome of checking one parameter set.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub p: u64,
    pub e: u32,
    pub a: u64,
    pub b: u64,
    pub label: CaseLabel,
    pub structure_match: bool,
    pub predicted: StructurePrediction,
    pub enumerated: Option<GraphStructure>,
    pub period_mismatches: Vec<PeriodMismatch>,
    pub period_states_checked: u64,
    pub notes: Vec<String>,
}

impl VerifyReport {
    pub fn is_ok(&self) -> bool {
        self.structure_match && self.period_mismatches.is_empty()
    }
}

/// Enumerates the graph and checks it against every applicable prediction.
pub fn verify(g: &Params, budget: u64) -> Result<VerifyReport, Error> {
    let m = *g.modulus();
    let (p, e, q) = (m.p(), m.e(), m.q());
    let cs = classify(g);
    let graph = build_graph(g, budget)?;
    let exact = graph.decompose();
    let enumerated = exact.to_graph_structure();
    let predicted = predict_structure_for(g, &cs);
    let mut notes = Vec::new();

    let mut structure_match = match (&predicted, &enumerated) {
        (StructurePrediction::Exact(want), Some(got)) => want == got,
        (StructurePrediction::Exact(_), None) => false,
        (StructurePrediction::Delegated, _) => {
            notes.push("no closed-form structure for this case; enumeration is the reference".into());
            true
        }
        (StructurePrediction::Unsupported, _) => {
            notes.push("degenerate repeated-root family; structure prediction unsupported".into());
            true
        }
    };

    let deep = cs.label == CaseLabel::UnitsRepeatedRootDeep;
    if deep {
        notes.push("periods checked only over the repeated-root residue class".into());
    }
    let states = if q <= PERIOD_EXHAUSTIVE_LIMIT { q } else { PERIOD_SAMPLE };
    let mut period_mismatches = Vec::new();
    for x in 0..states {
        let x0 = m.elem(x);
        let claim = if deep {
            // only the states over the repeated root carry a period claim
            (x % p == cs.omega.unwrap()).then(|| repeated_root_period(g, cs.omega.unwrap(), x0))
        } else {
            predict_period_for(g, &cs, x0)
        };
        let Some(predicted) = claim else { continue };
        let measured = exact.period_of(x);
        if predicted != measured {
            period_mismatches.push(PeriodMismatch { x0: x, predicted, measured });
        }
    }

    if cs.label == CaseLabel::AInIdeal {
        let la = m.valuation(g.a());
        let b = g.b();
        let hub_in = p.pow(e - 1);
        let branch_in = p.pow(la);
        let bad = (0..q)
            .filter(|&y| {
                let ye = m.elem(y);
                let expected = if ye == b {
                    hub_in
                } else if m.valuation(m.sub(ye, b)) == la {
                    branch_in
                } else {
                    0
                };
                graph.in_degree(y) != expected
            })
            .count();
        if bad > 0 {
            structure_match = false;
            notes.push(format!("in-degree law failed at {bad} states"));
        } else {
            notes.push("in-degree law verified at every state".into());
        }
    }

    Ok(VerifyReport {
        p,
        e,
        a: g.a().value(),
        b: g.b().value(),
        label: cs.label,
        structure_match,
        predicted,
        enumerated,
        period_mismatches,
        period_states_checked: states,
        notes,
    })
}

/// One failing cell of a parameter sweep.
#[derive(Clone, Debug, Serialize)]
pub struct GridFailure {
    pub p: u64,
    pub e: u32,
    pub a: u64,
    pub b: u64,
    pub label: CaseLabel,
    pub detail: String,
}

/// Outcome of sweeping all (a, b) for each modulus.
#[derive(Clone, Debug, Serialize)]
pub struct GridOutcome {
    pub checked: u64,
    pub failures: Vec<GridFailure>,
}

fn failure_detail(r: &VerifyReport) -> String {
    if !r.structure_match {
        let got = match &r.enumerated {
            Some(s) => s.to_string(),
            None => "unclassifiable component".into(),
        };
        return format!("structure mismatch: predicted [{}], enumerated [{got}]", r.predicted);
    }
    let first = &r.period_mismatches[0];
    format!(
        "{} period mismatches (first: x0={} predicted {}+{}, measured {}+{})",
        r.period_mismatches.len(),
        first.x0,
        first.predicted.pre_period,
        first.predicted.period,
        first.measured.pre_period,
        first.measured.period,
    )
}

/// Verifies every (a, b) over Z_{p^e} for each listed p and 1 <= e <= e_max.
pub fn grid_scan(ps: &[u64], e_max: u32, budget: u64) -> Result<GridOutcome, Error> {
    let mut cells = Vec::new();
    for &p in ps {
        for e in 1..=e_max {
            let m = Modulus::new(p, e)?;
            for a in 0..m.q() {
                for b in 0..m.q() {
                    cells.push((m, a, b));
                }
            }
        }
    }
    let scanned: Result<Vec<Option<GridFailure>>, Error> = cells
        .par_iter()
        .map(|&(m, a, b)| {
            let g = Params::new(m, a, b);
            let r = verify(&g, budget)?;
            Ok((!r.is_ok()).then(|| GridFailure {
                p: r.p,
                e: r.e,
                a: r.a,
                b: r.b,
                label: r.label,
                detail: failure_detail(&r),
            }))
        })
        .collect();
    Ok(GridOutcome { checked: cells.len() as u64, failures: scanned?.into_iter().flatten().collect() })
}
