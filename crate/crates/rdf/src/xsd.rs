//! XSD literal validation, canonicalization and value extraction.
//!
//! Ten datatypes are understood. Literals of any other datatype are opaque:
//! they validate unconditionally and compare only by term identity.

use std::cmp::Ordering;
use std::sync::LazyLock;

use chrono::{DateTime, FixedOffset, NaiveDate, NaiveDateTime, NaiveTime, TimeZone, Utc};
use regex::Regex;

use crate::vocab::xsd;
use crate::{Error, Iri, Literal, Result};

static INTEGER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[+-]?[0-9]+$").unwrap());
static DECIMAL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)$").unwrap());
static FLOATING: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^([+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)([eE][+-]?[0-9]+)?|[+-]?INF|NaN)$").unwrap()
});
static DATE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(-?[0-9]{4,})-([0-9]{2})-([0-9]{2})(Z|[+-][0-9]{2}:[0-9]{2})?$").unwrap()
});
static DATE_TIME: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"^(-?[0-9]{4,}-[0-9]{2}-[0-9]{2})T([0-9]{2}:[0-9]{2}:[0-9]{2}(\.[0-9]+)?)(Z|[+-][0-9]{2}:[0-9]{2})?$",
    )
    .unwrap()
});
static TIME: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^([0-9]{2}:[0-9]{2}:[0-9]{2}(\.[0-9]+)?)(Z|[+-][0-9]{2}:[0-9]{2})?$").unwrap()
});

/// The datatypes with value semantics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum XsdType {
    String,
    Int,
    Integer,
    Long,
    Decimal,
    Float,
    Double,
    Boolean,
    Date,
    DateTime,
    Time,
}

impl XsdType {
    pub fn from_iri(iri: &str) -> Option<Self> {
        Some(match iri {
            xsd::STRING => XsdType::String,
            xsd::INT => XsdType::Int,
            xsd::INTEGER => XsdType::Integer,
            xsd::LONG => XsdType::Long,
            xsd::DECIMAL => XsdType::Decimal,
            xsd::FLOAT => XsdType::Float,
            xsd::DOUBLE => XsdType::Double,
            xsd::BOOLEAN => XsdType::Boolean,
            xsd::DATE => XsdType::Date,
            xsd::DATE_TIME => XsdType::DateTime,
            xsd::TIME => XsdType::Time,
            _ => return None,
        })
    }

    pub fn is_numeric(self) -> bool {
        matches!(
            self,
            XsdType::Int | XsdType::Integer | XsdType::Long | XsdType::Decimal | XsdType::Float | XsdType::Double
        )
    }
}

fn invalid(lexical: &str, datatype: &Iri) -> Error {
    Error::InvalidLiteral {
        lexical: lexical.to_string(),
        datatype: datatype.as_str().to_string(),
    }
}

fn canonical_integer(lexical: &str) -> String {
    let (neg, digits) = match lexical.as_bytes()[0] {
        b'-' => (true, &lexical[1..]),
        b'+' => (false, &lexical[1..]),
        _ => (false, lexical),
    };
    let digits = digits.trim_start_matches('0');
    match (neg, digits.is_empty()) {
        (_, true) => "0".to_string(),
        (true, false) => format!("-{digits}"),
        (false, false) => digits.to_string(),
    }
}

/// Checks `lexical` against `datatype` and returns the literal with a
/// canonical lexical form. Strings pass unchanged.
pub fn validate_literal(lexical: &str, datatype: &Iri) -> Result<Literal> {
    let Some(kind) = XsdType::from_iri(datatype.as_str()) else {
        return Ok(Literal::typed(lexical, datatype.clone()));
    };
    if kind == XsdType::String {
        return Ok(Literal::string(lexical));
    }
    let trimmed = lexical.trim();
    let canonical = match kind {
        XsdType::String => unreachable!(),
        XsdType::Int | XsdType::Long | XsdType::Integer => {
            if !INTEGER.is_match(trimmed) {
                return Err(invalid(lexical, datatype));
            }
            let canonical = canonical_integer(trimmed);
            let in_range = match kind {
                XsdType::Int => canonical.parse::<i32>().is_ok(),
                XsdType::Long => canonical.parse::<i64>().is_ok(),
                _ => true,
            };
            if !in_range {
                return Err(invalid(lexical, datatype));
            }
            canonical
        }
        XsdType::Decimal => {
            if !DECIMAL.is_match(trimmed) {
                return Err(invalid(lexical, datatype));
            }
            trimmed.trim_start_matches('+').to_string()
        }
        XsdType::Float | XsdType::Double => {
            if !FLOATING.is_match(trimmed) {
                return Err(invalid(lexical, datatype));
            }
            match trimmed {
                "+INF" => "INF".to_string(),
                other => other.trim_start_matches('+').to_string(),
            }
        }
        XsdType::Boolean => match trimmed {
            "true" | "1" => "true".to_string(),
            "false" | "0" => "false".to_string(),
            _ => return Err(invalid(lexical, datatype)),
        },
        XsdType::Date => {
            parse_date(trimmed).ok_or_else(|| invalid(lexical, datatype))?;
            trimmed.to_string()
        }
        XsdType::DateTime => {
            parse_date_time(trimmed).ok_or_else(|| invalid(lexical, datatype))?;
            trimmed.to_string()
        }
        XsdType::Time => {
            parse_time(trimmed).ok_or_else(|| invalid(lexical, datatype))?;
            trimmed.to_string()
        }
    };
    Ok(Literal::typed(canonical, datatype.clone()))
}

fn offset(tz: Option<&str>) -> Option<FixedOffset> {
    match tz {
        None | Some("Z") => FixedOffset::east_opt(0),
        Some(tz) => {
            let sign = if tz.starts_with('-') { -1 } else { 1 };
            let hours: i32 = tz[1..3].parse().ok()?;
            let minutes: i32 = tz[4..6].parse().ok()?;
            if hours > 14 || minutes > 59 {
                return None;
            }
            FixedOffset::east_opt(sign * (hours * 3600 + minutes * 60))
        }
    }
}

fn parse_clock(text: &str) -> Option<(NaiveTime, bool)> {
    // 24:00:00 is allowed and denotes the end of the day
    if let Some(rest) = text.strip_prefix("24:00:00") {
        if rest.trim_start_matches('.').chars().all(|c| c == '0') {
            return Some((NaiveTime::MIN, true));
        }
        return None;
    }
    NaiveTime::parse_from_str(text, "%H:%M:%S%.f").ok().map(|t| (t, false))
}

/// Timezone-less values are read as UTC.
pub fn parse_date_time(text: &str) -> Option<DateTime<FixedOffset>> {
    let caps = DATE_TIME.captures(text)?;
    let date = parse_date_part(&caps[1])?;
    let (time, next_day) = parse_clock(&caps[2])?;
    let tz = offset(caps.get(4).map(|m| m.as_str()))?;
    let mut naive = NaiveDateTime::new(date, time);
    if next_day {
        naive += chrono::Duration::days(1);
    }
    tz.from_local_datetime(&naive).single()
}

fn parse_date_part(text: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(text, "%Y-%m-%d").ok()
}

pub fn parse_date(text: &str) -> Option<DateTime<FixedOffset>> {
    let caps = DATE.captures(text)?;
    let date = parse_date_part(&format!("{}-{}-{}", &caps[1], &caps[2], &caps[3]))?;
    let tz = offset(caps.get(4).map(|m| m.as_str()))?;
    tz.from_local_datetime(&date.and_time(NaiveTime::MIN)).single()
}

/// Seconds since midnight UTC.
pub fn parse_time(text: &str) -> Option<f64> {
    let caps = TIME.captures(text)?;
    let (time, next_day) = parse_clock(&caps[1])?;
    let tz = offset(caps.get(3).map(|m| m.as_str()))?;
    let secs = if next_day {
        86_400.0
    } else {
        f64::from(chrono::Timelike::num_seconds_from_midnight(&time))
            + f64::from(chrono::Timelike::nanosecond(&time)) / 1e9
    };
    Some(secs - f64::from(tz.local_minus_utc()))
}

/// The comparable value of a literal, when its datatype has value semantics.
#[derive(Debug, Clone, PartialEq)]
pub enum Value<'a> {
    Integer(i128),
    Number(f64),
    Boolean(bool),
    DateTime(DateTime<Utc>),
    Date(DateTime<Utc>),
    Time(f64),
    String(&'a str),
}

impl<'a> Value<'a> {
    /// `None` for opaque datatypes, language-tagged strings and malformed
    /// lexical forms.
    pub fn of(literal: &'a Literal) -> Option<Self> {
        if literal.language().is_some() {
            return None;
        }
        let lex = literal.lexical().trim();
        Some(match XsdType::from_iri(literal.datatype().as_str())? {
            XsdType::String => Value::String(literal.lexical()),
            XsdType::Int | XsdType::Integer | XsdType::Long => {
                if !INTEGER.is_match(lex) {
                    return None;
                }
                Value::Integer(lex.parse().ok()?)
            }
            XsdType::Decimal | XsdType::Float | XsdType::Double => {
                if !FLOATING.is_match(lex) {
                    return None;
                }
                Value::Number(match lex.trim_start_matches('+') {
                    "INF" => f64::INFINITY,
                    "-INF" => f64::NEG_INFINITY,
                    other => other.parse().ok()?,
                })
            }
            XsdType::Boolean => match lex {
                "true" | "1" => Value::Boolean(true),
                "false" | "0" => Value::Boolean(false),
                _ => return None,
            },
            XsdType::Date => Value::Date(parse_date(lex)?.with_timezone(&Utc)),
            XsdType::DateTime => Value::DateTime(parse_date_time(lex)?.with_timezone(&Utc)),
            XsdType::Time => Value::Time(parse_time(lex)?),
        })
    }

    /// Value ordering; `None` when the two values are incomparable.
    pub fn compare(&self, other: &Value<'_>) -> Option<Ordering> {
        use Value::*;
        match (self, other) {
            (Integer(a), Integer(b)) => Some(a.cmp(b)),
            (Integer(a), Number(b)) => (*a as f64).partial_cmp(b),
            (Number(a), Integer(b)) => a.partial_cmp(&(*b as f64)),
            (Number(a), Number(b)) => a.partial_cmp(b),
            (Boolean(a), Boolean(b)) => Some(a.cmp(b)),
            (DateTime(a), DateTime(b)) | (Date(a), Date(b)) => Some(a.cmp(b)),
            (Time(a), Time(b)) => a.partial_cmp(b),
            (String(a), String(b)) => Some(a.cmp(b)),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dt(name: &str) -> Iri {
        Iri::new_unchecked(format!("http://www.w3.org/2001/XMLSchema#{name}"))
    }

    #[test]
    fn fixture_values_validate() {
        let lit = validate_literal("4242", &dt("int")).unwrap();
        assert_eq!(lit.lexical(), "4242");
        assert_eq!(lit.datatype(), &dt("int"));
        assert!(validate_literal("2017-03-23T10:00:00", &dt("dateTime")).is_ok());
        assert!(validate_literal("2017-03-23T10:03:17", &dt("dateTime")).is_ok());
        for v in ["200.5", "200.8", "200.9", "0.01", "0.05", "0.72"] {
            assert!(validate_literal(v, &dt("float")).is_ok(), "{v}");
        }
        for s in ["layer1", "temp", "temperature", "F", "%", "st1", "status1"] {
            assert!(validate_literal(s, &dt("string")).is_ok());
        }
    }

    #[test]
    fn malformed_values_rejected() {
        assert!(validate_literal("200.x", &dt("float")).is_err());
        assert!(validate_literal("abc", &dt("int")).is_err());
        assert!(validate_literal("2147483648", &dt("int")).is_err());
        assert!(validate_literal("2017-02-30", &dt("date")).is_err());
        assert!(validate_literal("2017-03-23 10:00:00", &dt("dateTime")).is_err());
        assert!(validate_literal("25:00:00", &dt("time")).is_err());
        assert!(validate_literal("yes", &dt("boolean")).is_err());
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(validate_literal("+0042", &dt("integer")).unwrap().lexical(), "42");
        assert_eq!(validate_literal("-0", &dt("int")).unwrap().lexical(), "0");
        assert_eq!(validate_literal("1", &dt("boolean")).unwrap().lexical(), "true");
        assert_eq!(validate_literal("+1.5e3", &dt("double")).unwrap().lexical(), "1.5e3");
        assert_eq!(validate_literal(" 7 ", &dt("long")).unwrap().lexical(), "7");
        assert_eq!(validate_literal(" 7 ", &dt("string")).unwrap().lexical(), " 7 ");
    }

    #[test]
    fn opaque_datatype_passes() {
        let custom = Iri::new_unchecked("http://example.org/dt#money");
        let lit = validate_literal("anything", &custom).unwrap();
        assert_eq!(lit.datatype(), &custom);
        assert_eq!(Value::of(&lit), None);
    }

    #[test]
    fn chronological_comparison() {
        let a = Literal::typed("2017-03-23T10:00:00", dt("dateTime"));
        let b = Literal::typed("2017-03-23T10:03:16", dt("dateTime"));
        let c = Literal::typed("2017-03-23T11:00:00+01:00", dt("dateTime"));
        let (va, vb, vc) = (Value::of(&a).unwrap(), Value::of(&b).unwrap(), Value::of(&c).unwrap());
        assert_eq!(va.compare(&vb), Some(Ordering::Less));
        assert_eq!(va.compare(&vc), Some(Ordering::Equal));
    }

    #[test]
    fn mixed_numeric_comparison() {
        let i = Literal::typed("200", dt("int"));
        let f = Literal::typed("200.5", dt("float"));
        let s = Literal::string("200");
        let (vi, vf, vs) = (Value::of(&i).unwrap(), Value::of(&f).unwrap(), Value::of(&s).unwrap());
        assert_eq!(vi.compare(&vf), Some(Ordering::Less));
        assert_eq!(vi.compare(&vs), None);
    }
}
