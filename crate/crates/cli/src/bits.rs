//! Byte streams as bit vectors, least significant bit first.

pub fn unpack_bytes(bytes: &[u8]) -> Vec<u8> {
    bytes.iter().flat_map(|&b| (0..8).map(move |k| b >> k & 1)).collect()
}

/// Packs bits into bytes; a partial final byte is zero padded.
pub fn pack_bytes(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| c.iter().enumerate().fold(0u8, |acc, (k, &b)| acc | (b & 1) << k))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let data = vec![0x01, 0x80, 0xa5];
        let bits = unpack_bytes(&data);
        assert_eq!(&bits[..8], &[1, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(pack_bytes(&bits), data);
        assert_eq!(pack_bytes(&[1, 1, 0]), vec![3]);
    }
}
