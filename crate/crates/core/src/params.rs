//! Parameter validation shared by the converter builders.

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid parameter `{field}`: {reason}")]
pub struct InvalidParam {
    pub field: String,
    pub reason: String,
}

pub(crate) fn positive(field: &str, v: f64) -> Result<(), InvalidParam> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(InvalidParam {
            field: field.into(),
            reason: format!("must be a positive finite number, got {v}"),
        })
    }
}

pub(crate) fn non_negative(field: &str, v: f64) -> Result<(), InvalidParam> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(InvalidParam {
            field: field.into(),
            reason: format!("must be a non-negative finite number, got {v}"),
        })
    }
}

pub(crate) fn finite(field: &str, v: f64) -> Result<(), InvalidParam> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(InvalidParam {
            field: field.into(),
            reason: format!("must be finite, got {v}"),
        })
    }
}

pub(crate) fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}
