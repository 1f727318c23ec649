//! TOML key files with decimal-string fields.
//!
//! ```toml
//! # public
//! p = "997"
//! alpha = "809"
//! y = "12"
//! ```
//!
//! The private file holds a single `x` field.

use std::fs;
use std::path::Path;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::{ElGamalPrivate, ElGamalPublic};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct PublicDoc {
    p: String,
    alpha: String,
    y: String,
}

#[derive(Serialize, Deserialize)]
struct PrivateDoc {
    x: String,
}

fn parse_int(field: &str, s: &str) -> Result<BigUint> {
    s.trim()
        .parse()
        .map_err(|_| Error::Format(format!("key field `{field}` is not a decimal integer")))
}

pub fn public_to_string(key: &ElGamalPublic) -> String {
    let doc = PublicDoc { p: key.p.to_string(), alpha: key.alpha.to_string(), y: key.y.to_string() };
    toml::to_string(&doc).expect("plain string table")
}

pub fn private_to_string(key: &ElGamalPrivate) -> String {
    toml::to_string(&PrivateDoc { x: key.x.to_string() }).expect("plain string table")
}

pub fn public_from_str(s: &str) -> Result<ElGamalPublic> {
    let doc: PublicDoc = toml::from_str(s).map_err(|e| Error::Format(format!("public key file: {e}")))?;
    ElGamalPublic::new(parse_int("p", &doc.p)?, parse_int("alpha", &doc.alpha)?, parse_int("y", &doc.y)?)
}

pub fn private_from_str(s: &str) -> Result<ElGamalPrivate> {
    let doc: PrivateDoc = toml::from_str(s).map_err(|e| Error::Format(format!("private key file: {e}")))?;
    Ok(ElGamalPrivate { x: parse_int("x", &doc.x)? })
}

pub fn read_public(path: &Path) -> Result<ElGamalPublic> {
    public_from_str(&fs::read_to_string(path)?)
}

pub fn read_private(path: &Path) -> Result<ElGamalPrivate> {
    private_from_str(&fs::read_to_string(path)?)
}
