//! Z-order (Morton) bit interleaving for spatial sorting.

/// Interleave two 16-bit coordinates into a 32-bit Morton key.
///
/// `x` occupies the even bits, `y` the odd bits, so keys sort points along
/// the Z-order curve.
#[inline]
pub fn interleave16(x: u16, y: u16) -> u32 {
    spread16(x) | (spread16(y) << 1)
}

#[inline]
fn spread16(v: u16) -> u32 {
    let mut v = v as u32;
    v = (v | (v << 8)) & 0x00FF_00FF;
    v = (v | (v << 4)) & 0x0F0F_0F0F;
    v = (v | (v << 2)) & 0x3333_3333;
    v = (v | (v << 1)) & 0x5555_5555;
    v
}
