//! Number formatting shared by the CSV writers.

/// Shortest decimal string that parses back to exactly `x`.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        // drop the sign of negative zero
        return "0".into();
    }
    format!("{x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [0.1, -2.5e-300, 1.0 / 3.0, 12345.678, f64::MAX, 1e-5] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(2.0), "2");
    }
}
