//! Little-endian, LSB-first fixed-width bit packing.

pub(crate) fn pack_bits<I>(values: I, bits: u32, out: &mut Vec<u8>)
where
    I: IntoIterator<Item = u32>,
{
    debug_assert!(bits <= 32);
    let mut acc: u64 = 0;
    let mut acc_bits = 0u32;
    for v in values {
        debug_assert!(bits == 32 || v < (1u32 << bits), "value {v} does not fit in {bits} bits");
        acc |= (v as u64) << acc_bits;
        acc_bits += bits;
        while acc_bits >= 8 {
            out.push(acc as u8);
            acc >>= 8;
            acc_bits -= 8;
        }
    }
    if acc_bits > 0 {
        out.push(acc as u8);
    }
}

/// Reads `count` values of `bits` width. The caller guarantees that `bytes`
/// holds at least `count * bits` bits.
pub(crate) fn unpack_bits(bytes: &[u8], bits: u32, count: usize) -> Vec<u32> {
    let mask = if bits == 32 { u64::from(u32::MAX) } else { (1u64 << bits) - 1 };
    let mut out = Vec::with_capacity(count);
    let mut acc: u64 = 0;
    let mut acc_bits = 0u32;
    let mut iter = bytes.iter();
    while out.len() < count {
        while acc_bits < bits {
            let b = *iter.next().expect("input too short for unpack");
            acc |= (b as u64) << acc_bits;
            acc_bits += 8;
        }
        out.push((acc & mask) as u32);
        acc >>= bits;
        acc_bits -= bits;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_layout() {
        let mut out = Vec::new();
        pack_bits([0b101u32, 0b011, 0b111], 3, &mut out);
        // 101 | 011 << 3 | 111 << 6 = 0b1_1101_1101
        assert_eq!(out, vec![0b1101_1101, 0b1]);
        assert_eq!(unpack_bits(&out, 3, 3), vec![0b101, 0b011, 0b111]);
    }

    #[test]
    fn widths_roundtrip() {
        for bits in [1u32, 3, 4, 6, 10, 13, 18, 23, 32] {
            let max = if bits == 32 { u32::MAX } else { (1u32 << bits) - 1 };
            let vals: Vec<u32> = (0..64u32).map(|i| i.wrapping_mul(2_654_435_761) & max).collect();
            let mut out = Vec::new();
            pack_bits(vals.iter().copied(), bits, &mut out);
            assert_eq!(out.len(), (64 * bits as usize).div_ceil(8));
            assert_eq!(unpack_bits(&out, bits, 64), vals);
        }
    }
}
