//! Serde helpers shared by the JSON interfaces.

/// `u128` as a `0x`-prefixed minimal hex string. Deserialization also
/// accepts a decimal string or a bare JSON integer.
pub mod hex_u128 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u128, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format!("{v:#x}"))
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(u64),
        Str(String),
    }

    pub fn parse(s: &str) -> Result<u128, String> {
        match s.strip_prefix("0x") {
            Some(digits) => u128::from_str_radix(digits, 16),
            None => s.parse(),
        }
        .map_err(|e| format!("invalid integer {s:?}: {e}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<u128, D::Error> {
        match Repr::deserialize(deserializer)? {
            Repr::Int(v) => Ok(v.into()),
            Repr::Str(s) => parse(&s).map_err(serde::de::Error::custom),
        }
    }
}

/// Fixed-size byte arrays as `0x`-prefixed hex.
pub mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer, const N: usize>(
        v: &[u8; N],
        serializer: S,
    ) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format!("0x{}", hex::encode(v)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>, const N: usize>(
        deserializer: D,
    ) -> Result<[u8; N], D::Error> {
        let s = String::deserialize(deserializer)?;
        decode(&s).map_err(serde::de::Error::custom)
    }

    pub fn decode<const N: usize>(s: &str) -> Result<[u8; N], String> {
        let raw = hex::decode(s.strip_prefix("0x").unwrap_or(s)).map_err(|e| e.to_string())?;
        let len = raw.len();
        raw.try_into()
            .map_err(|_| format!("expected {N} bytes, got {len}"))
    }
}
