use std::f64::consts::LN_10;

/// Conversion applied by [`db_convert`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbMode {
    /// 10^(dB/10)
    DbToPowerRatio,
    /// 10^(dB/20)
    DbToAmplitudeRatio,
    /// Attenuation in dB/mm to a power attenuation coefficient in 1/m.
    DbPerMmToPerMPower,
}

pub fn db_convert(value: f64, mode: DbMode) -> f64 {
    match mode {
        DbMode::DbToPowerRatio => 10f64.powf(value / 10.0),
        DbMode::DbToAmplitudeRatio => 10f64.powf(value / 20.0),
        // 1 dB of power = ln(10)/10 nepers of power; 1000 mm per m.
        DbMode::DbPerMmToPerMPower => value * 1000.0 * LN_10 / 10.0,
    }
}

pub fn power_ratio_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

pub fn amplitude_ratio_to_db(ratio: f64) -> f64 {
    20.0 * ratio.log10()
}

pub fn per_m_power_to_db_per_mm(alpha: f64) -> f64 {
    alpha * 10.0 / (1000.0 * LN_10)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * db_convert(dbm, DbMode::DbToPowerRatio)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    power_ratio_to_db(watts / 1e-3)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn identity_and_reference_values() {
        assert_eq!(db_convert(0.0, DbMode::DbToPowerRatio), 1.0);
        assert_eq!(db_convert(0.0, DbMode::DbToAmplitudeRatio), 1.0);
        assert!(rel(db_convert(-10.7, DbMode::DbToPowerRatio), 0.085113803820237) < 1e-12);
        // 3.2 dB/mm = 320 ln(10) per metre
        assert!(rel(db_convert(3.2, DbMode::DbPerMmToPerMPower), 320.0 * LN_10) < 1e-15);
        assert!((db_convert(3.2, DbMode::DbPerMmToPerMPower) - 736.83).abs() < 5e-3);
    }

    #[test]
    fn dbm_round_trip() {
        assert!(rel(dbm_to_watts(0.0), 1e-3) < 1e-15);
        assert!((watts_to_dbm(dbm_to_watts(-4.0)) + 4.0).abs() < 1e-12);
    }
}
