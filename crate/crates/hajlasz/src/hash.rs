use serde::Serialize;
use sha2::{Digest, Sha256};

/// JSON with object keys sorted and no whitespace.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    // serde_json maps are ordered by key, so a round trip through Value sorts them
    let v = serde_json::to_value(value).expect("value serialises to JSON");
    v.to_string()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn content_hash<T: Serialize>(value: &T) -> String {
    sha256_hex(canonical_json(value).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn key_order_does_not_matter() {
        let a: serde_json::Value = serde_json::from_str(r#"{"b":1,"a":[1,2]}"#).unwrap();
        let b: serde_json::Value = serde_json::from_str(r#"{"a":[1,2],"b":1}"#).unwrap();
        assert_eq!(canonical_json(&a), r#"{"a":[1,2],"b":1}"#);
        assert_eq!(content_hash(&a), content_hash(&b));
    }
}
