//! Validated JSON input: parse the plain shape, then run the constructor so
//! constraint violations keep their own error codes.

use serde::de::DeserializeOwned;

use crate::error::{Error, Result};

pub trait FromJson: Sized {
    /// The unvalidated wire shape.
    type Repr: DeserializeOwned;

    fn from_repr(repr: Self::Repr) -> Result<Self>;

    fn from_json(text: &str) -> Result<Self> {
        let repr = serde_json::from_str(text)
            .map_err(|e| Error::Input(format!("malformed JSON input: {e}")))?;
        Self::from_repr(repr)
    }
}
