//! 3GPP TR 38.901 UMa / UMi-Street-Canyon path loss and the sector antenna
//! pattern.

use crate::scenario::{CellDef, Environment, Site};

use super::PropagationConfig;

pub const DEFAULT_UE_HEIGHT_M: f64 = 1.5;
const SPEED_OF_LIGHT: f64 = 299_792_458.0;
const MIN_DISTANCE_M: f64 = 1.0;
/// Effective environment height for the breakpoint distance.
const EFFECTIVE_ENV_HEIGHT_M: f64 = 1.0;

/// Path loss in dB for the given environment. Distances below 1 m are clamped.
pub fn path_loss_38901(env: Environment, carrier_hz: f64, d2d_m: f64, h_bs: f64, h_ut: f64, los: bool) -> f64 {
    let d2d = d2d_m.max(MIN_DISTANCE_M);
    let dh = h_bs - h_ut;
    let d3d = (d2d * d2d + dh * dh).sqrt();
    let fc_ghz = carrier_hz / 1e9;
    let log_f = fc_ghz.log10();
    let d_bp = 4.0 * (h_bs - EFFECTIVE_ENV_HEIGHT_M) * (h_ut - EFFECTIVE_ENV_HEIGHT_M) * carrier_hz / SPEED_OF_LIGHT;

    match env {
        Environment::UrbanMacro => {
            let pl_los = if d2d <= d_bp {
                28.0 + 22.0 * d3d.log10() + 20.0 * log_f
            } else {
                28.0 + 40.0 * d3d.log10() + 20.0 * log_f - 9.0 * (d_bp * d_bp + dh * dh).log10()
            };
            if los {
                return pl_los;
            }
            let pl_nlos = 13.54 + 39.08 * d3d.log10() + 20.0 * log_f - 0.6 * (h_ut - 1.5);
            pl_los.max(pl_nlos)
        }
        Environment::UrbanMicro => {
            let pl_los = if d2d <= d_bp {
                32.4 + 21.0 * d3d.log10() + 20.0 * log_f
            } else {
                32.4 + 40.0 * d3d.log10() + 20.0 * log_f - 9.5 * (d_bp * d_bp + dh * dh).log10()
            };
            if los {
                return pl_los;
            }
            let pl_nlos = 35.3 * d3d.log10() + 22.4 + 21.3 * log_f - 0.3 * (h_ut - 1.5);
            pl_los.max(pl_nlos)
        }
    }
}

/// 38.901 LOS probability for outdoor users (UE height at most 13 m).
pub fn los_probability(env: Environment, d2d_m: f64, _h_ut: f64) -> f64 {
    if d2d_m <= 18.0 {
        return 1.0;
    }
    let r = 18.0 / d2d_m;
    match env {
        Environment::UrbanMacro => r + (-d2d_m / 63.0).exp() * (1.0 - r),
        Environment::UrbanMicro => r + (-d2d_m / 36.0).exp() * (1.0 - r),
    }
}

/// Horizontal sector pattern `min(12 (theta / 65)^2, 30)` dB relative to
/// boresight; omnidirectional cells return 0. With `apply_tilt` a vertical
/// pattern with 10 degree beamwidth is added and the sum capped at 30 dB.
pub fn antenna_attenuation_db(
    site_xy: (f64, f64),
    h_bs: f64,
    azimuth_deg: Option<f64>,
    tilt_deg: f64,
    pos: (f64, f64),
    h_ut: f64,
    apply_tilt: bool,
) -> f64 {
    let (dx, dy) = (pos.0 - site_xy.0, pos.1 - site_xy.1);
    let horizontal = match azimuth_deg {
        Some(az) if dx != 0.0 || dy != 0.0 => {
            let bearing = dx.atan2(dy).to_degrees();
            let theta = (bearing - az + 540.0).rem_euclid(360.0) - 180.0;
            (12.0 * (theta / 65.0).powi(2)).min(30.0)
        }
        _ => 0.0,
    };
    if !apply_tilt {
        return horizontal;
    }
    let elevation = (h_bs - h_ut).atan2(dx.hypot(dy)).to_degrees();
    let vertical = (12.0 * ((elevation - tilt_deg) / 10.0).powi(2)).min(30.0);
    (horizontal + vertical).min(30.0)
}

/// NLOS path loss from `cell` to `pos`, antenna attenuation included. The
/// per-pixel LOS draw of [`super::LosMode::Probabilistic`] lives in
/// [`super::LinkModel`].
pub fn path_loss(cell: &CellDef, site: &Site, pos: (f64, f64), cfg: &PropagationConfig) -> f64 {
    let d2d = (pos.0 - site.x).hypot(pos.1 - site.y);
    path_loss_38901(site.environment, cell.carrier_hz, d2d, cell.height_m, cfg.ue_height_m, false)
        + antenna_attenuation_db(
            (site.x, site.y),
            cell.height_m,
            cell.azimuth_deg,
            cell.tilt_deg,
            pos,
            cfg.ue_height_m,
            cfg.apply_tilt,
        )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uma_nlos_hand_evaluated() {
        // f = 2.16 GHz, d2D = 500 m, hBS = 25 m, hUT = 1.5 m
        // d3D = sqrt(500^2 + 23.5^2) = 500.551945...
        // d'BP = 4 * 24 * 0.5 * 2.16e9 / c = 345.839 m  -> d2D beyond breakpoint
        // PL_LOS  = 28 + 40 log10(d3D) + 20 log10(2.16) - 9 log10(d'BP^2 + 23.5^2) = 96.949
        // PL'NLOS = 13.54 + 39.08 log10(d3D) + 20 log10(2.16) = 125.7235
        let pl = path_loss_38901(Environment::UrbanMacro, 2.16e9, 500.0, 25.0, 1.5, false);
        assert!((pl - 125.723_548).abs() < 1e-5, "{pl}");
    }

    #[test]
    fn umi_nlos_hand_evaluated() {
        // f = 3.655 GHz, d2D = 200 m, hBS = 10 m, hUT = 1.5 m
        // d3D = sqrt(200^2 + 8.5^2) = 200.18055
        // d'BP = 219.45 m -> LOS branch 1 gives 91.988
        // PL'NLOS = 35.3 log10(d3D) + 22.4 + 21.3 log10(3.655) = 115.6297
        let pl = path_loss_38901(Environment::UrbanMicro, 3.655e9, 200.0, 10.0, 1.5, false);
        assert!((pl - 115.629_693).abs() < 1e-5, "{pl}");
    }

    #[test]
    fn monotone_in_distance_and_frequency() {
        let at = |f: f64, d: f64| path_loss_38901(Environment::UrbanMacro, f, d, 25.0, 1.5, false);
        assert!(at(2.16e9, 1000.0) > at(2.16e9, 500.0));
        assert!(at(3.655e9, 500.0) > at(0.773e9, 500.0));
        let umi = |d: f64| path_loss_38901(Environment::UrbanMicro, 3.655e9, d, 10.0, 1.5, false);
        assert!(umi(400.0) > umi(100.0));
    }

    #[test]
    fn distance_clamped_below_one_meter() {
        let a = path_loss_38901(Environment::UrbanMacro, 2e9, 0.0, 25.0, 1.5, false);
        let b = path_loss_38901(Environment::UrbanMacro, 2e9, 1.0, 25.0, 1.5, false);
        assert_eq!(a, b);
        assert!(a.is_finite());
    }

    #[test]
    fn los_never_exceeds_nlos() {
        for d in [20.0, 100.0, 400.0, 2000.0] {
            for env in [Environment::UrbanMacro, Environment::UrbanMicro] {
                let los = path_loss_38901(env, 2e9, d, 20.0, 1.5, true);
                let nlos = path_loss_38901(env, 2e9, d, 20.0, 1.5, false);
                assert!(los <= nlos);
            }
        }
        assert_eq!(los_probability(Environment::UrbanMacro, 10.0, 1.5), 1.0);
        assert!(los_probability(Environment::UrbanMicro, 500.0, 1.5) < 0.05);
    }

    #[test]
    fn sector_pattern() {
        let att = |pos| antenna_attenuation_db((0.0, 0.0), 25.0, Some(0.0), 0.0, pos, 1.5, false);
        assert_eq!(att((0.0, 100.0)), 0.0);
        // 65 degrees off boresight: 12 dB
        let p = (65f64.to_radians().sin() * 100.0, 65f64.to_radians().cos() * 100.0);
        assert!((att(p) - 12.0).abs() < 1e-9);
        assert_eq!(att((0.0, -100.0)), 30.0);
        assert_eq!(antenna_attenuation_db((0.0, 0.0), 25.0, None, 0.0, (0.0, -5.0), 1.5, false), 0.0);
        // 120-degree sector boresight at 120 deg: a point due south-east-ish
        let p = (120f64.to_radians().sin() * 50.0, 120f64.to_radians().cos() * 50.0);
        assert!(antenna_attenuation_db((0.0, 0.0), 25.0, Some(120.0), 0.0, p, 1.5, false) < 1e-9);
    }
}
