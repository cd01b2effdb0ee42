//! CSV renderings of the artifact's tabular outputs.
//!
//! Values print with 17 significant digits so files round-trip doubles
//! exactly and byte-compare across reruns.

use crate::gpbo::BoResult;
use crate::pinn::TrainRecord;
use crate::seir::{ObservationSet, Trajectory};

/// 17 significant digits; enough to reproduce any f64 bit pattern.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `t,S,E,I,R` over the full integration grid.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,S,E,I,R\n");
    for (t, st) in traj.times().iter().zip(traj.states()) {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(*t),
            fmt_f64(st.s),
            fmt_f64(st.e),
            fmt_f64(st.i),
            fmt_f64(st.r)
        ));
    }
    out
}

/// `t,I,dI,ddI` plus the pseudo-data columns once reconstruction ran.
pub fn observations_csv(obs: &ObservationSet) -> String {
    let with_pseudo = obs.has_pseudo();
    let mut out = String::from(if with_pseudo {
        "t,I,dI,ddI,S_hat,E_hat,R_hat\n"
    } else {
        "t,I,dI,ddI\n"
    });
    for k in 0..obs.len() {
        out.push_str(&format!(
            "{},{},{},{}",
            fmt_f64(obs.times[k]),
            fmt_f64(obs.i_obs[k]),
            fmt_f64(obs.i_dot[k]),
            fmt_f64(obs.i_ddot[k])
        ));
        if with_pseudo {
            out.push_str(&format!(
                ",{},{},{}",
                fmt_f64(obs.pseudo_s.as_ref().unwrap()[k]),
                fmt_f64(obs.pseudo_e.as_ref().unwrap()[k]),
                fmt_f64(obs.pseudo_r.as_ref().unwrap()[k])
            ));
        }
        out.push('\n');
    }
    out
}

/// `epoch,train_loss,test_error,epsilon` with 1-based epochs.
pub fn train_record_csv(record: &TrainRecord) -> String {
    let mut out = String::from("epoch,train_loss,test_error,epsilon\n");
    for k in 0..record.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            k + 1,
            fmt_f64(record.train_loss[k]),
            fmt_f64(record.test_error[k]),
            fmt_f64(record.epsilon[k])
        ));
    }
    out
}

/// `iteration,epsilon,objective,is_initial` with 1-based iterations.
pub fn bo_trace_csv(result: &BoResult) -> String {
    let mut out = String::from("iteration,epsilon,objective,is_initial\n");
    for e in &result.evaluations {
        out.push_str(&format!(
            "{},{},{},{}\n",
            e.iteration + 1,
            fmt_f64(e.epsilon),
            fmt_f64(e.objective),
            e.is_initial
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seir;

    #[test]
    fn float_format_round_trips() {
        for x in [0.99, 1.0 / 3.0, 2.0f64.sqrt() * 1e-7, -123.456e200, 0.0] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn trajectory_csv_shape() {
        let traj =
            seir::simulate(&seir::default_params(), &seir::default_init(), 10.0, 0.2).unwrap();
        let csv = trajectory_csv(&traj);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,S,E,I,R");
        assert_eq!(lines.len(), 1 + 51);
        assert!(lines[1].starts_with("0.0000000000000000e0,9.8999999999999999e-1"));
    }

    #[test]
    fn observation_csv_grows_pseudo_columns() {
        let traj =
            seir::simulate(&seir::default_params(), &seir::default_init(), 10.0, 0.2).unwrap();
        let obs = seir::sample_observations(&traj, &seir::default_params(), 5, seir::SampleMode::Train, 0)
            .unwrap();
        let plain = observations_csv(&obs);
        assert!(plain.starts_with("t,I,dI,ddI\n"));
        let rec = crate::recon::reconstruct(
            &obs,
            &crate::recon::ReconConfig::new(0.2, 0.26, 0.1),
        )
        .unwrap();
        let full = observations_csv(&rec);
        assert!(full.starts_with("t,I,dI,ddI,S_hat,E_hat,R_hat\n"));
        assert_eq!(full.lines().count(), 6);
    }
}
