//! The two-level set model for one matchup: who wins the set, how many
//! points the loser scores, and how likely a deuce is.
//!
//! cargo run --example set_model

use volley::data::TeamId;
use volley::model::dist::{trunc_negbin_logpmf, trunc_negbin_mean, zip_zero_mass};
use volley::model::{
    expected_team_points, point_linear_predictor, set_win_prob, tie_prob, ModelConfig, ParameterState,
};

fn main() -> volley::Result<()> {
    let config = ModelConfig::preset(9)?;
    let mut s = ParameterState::initial(&config, 2, &[], &[]);
    s.mu = 0.36;
    s.h_set = 0.16;
    s.h_point = 0.20;
    s.theta = 4.6;
    s.m = 2.12;
    s.lambda = 3.97;
    s.beta_star[0] = vec![0.1, -0.1];
    let (home, away) = (TeamId(0), TeamId(1));

    let omega = set_win_prob(&s, &config, home, away, 1);
    let pi = tie_prob(&s, &config, home, away, 1);
    println!("P(home wins a set) = {omega:.4}");
    println!("P(no deuce) = {:.4}", zip_zero_mass(pi, s.lambda));

    for home_won in [true, false] {
        let eta = point_linear_predictor(&s, home, away, 1, home_won, 0.0);
        let p = 1.0 / (1.0 + eta.exp());
        println!(
            "home {}: eta {eta:.3}, p {p:.4}, mean loser baseline {:.2}",
            if home_won { "wins " } else { "loses" },
            trunc_negbin_mean(25, p)
        );
    }

    // the loser's baseline law for a home win, r = 25
    let eta = point_linear_predictor(&s, home, away, 1, true, 0.0);
    let p = 1.0 / (1.0 + eta.exp());
    println!("\ny  P(Y = y)");
    for y in (0..=23).step_by(2) {
        let lp = trunc_negbin_logpmf(y, 25, p).expect("y within the support");
        println!("{y:>2} {:.4} {}", lp.exp(), "#".repeat((lp.exp() * 300.0) as usize));
    }

    for set_index in [1u8, 5] {
        let (eh, ea) = expected_team_points(&s, &config, home, away, set_index, 1);
        println!("set {set_index}: expected points home {eh:.2}, away {ea:.2}");
    }
    Ok(())
}
