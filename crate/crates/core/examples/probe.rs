use mpc_core::channel::ChannelSpec;
use mpc_core::constraints::{ConstraintFunction, ConstraintSet};
use mpc_core::optimizer::*;

fn main() {
    let ch = ChannelSpec::new(1.0, 1.0).unwrap();
    let cs = ConstraintSet::new(1.0, vec![(ConstraintFunction::Square, 1.0)]).unwrap();
    let res = asymptotic_limit(&ch, &cs, 0.0, &SearchOptions::default()).unwrap();
    println!("best {:.12}", res.value);
    println!("atoms {:?}", res.distribution.atoms());
    println!("weights {:?}", res.distribution.weights());
    let spread = res.restart_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - res.restart_values.iter().cloned().fold(f64::INFINITY, f64::min);
    println!("restart spread {:.3e}", spread);
    println!("gap {:.3e}", res.certificate_gap);
}
