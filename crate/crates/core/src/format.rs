/// Renders a float as the shortest decimal string that parses back to the
/// same value. Never uses exponent notation.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        // drop the sign of negative zero
        return "0".to_string();
    }
    format!("{x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_round_trip() {
        assert_eq!(format_number(0.00315), "0.00315");
        assert_eq!(format_number(8463.0), "8463");
        assert_eq!(format_number(-0.000058), "-0.000058");
        assert_eq!(format_number(-0.0), "0");
        let x = 0.1 + 0.2;
        assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
    }
}
