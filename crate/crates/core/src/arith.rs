//! Integer helpers for progression arithmetic.

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Least common multiple, `None` on overflow.
pub fn lcm(a: u64, b: u64) -> Option<u64> {
    if a == 0 || b == 0 {
        return Some(0);
    }
    (a / gcd(a, b)).checked_mul(b)
}

/// Extended Euclid: returns `(g, x, y)` with `a·x + b·y = g = gcd(a, b)`.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut x0, mut x1) = (1i128, 0i128);
    let (mut y0, mut y1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (x0, x1) = (x1, x0 - q * x1);
        (y0, y1) = (y1, y0 - q * y1);
    }
    if r0 < 0 {
        (-r0, -x0, -y0)
    } else {
        (r0, x0, y0)
    }
}

/// Smallest `j >= 0` with `stride·j + offset ≡ target (mod modulus)` and
/// `stride·j + offset >= target`, together with the period of the solution
/// set in `j`. `None` when the congruence has no solution.
///
/// All arguments are nonnegative and `stride, modulus >= 1`.
pub fn first_meeting(stride: u64, offset: u64, modulus: u64, target: u64) -> Option<(u64, u64)> {
    let (s, o, m, t) = (stride as i128, offset as i128, modulus as i128, target as i128);
    let (g, x, _) = ext_gcd(s, m);
    let rhs = (t - o).rem_euclid(m);
    if rhs % g != 0 {
        return None;
    }
    let period = m / g;
    let mut j = ((rhs / g) * x).rem_euclid(period);
    let value = s * j + o;
    if value < t {
        let step = s * period;
        let missing = t - value;
        j += ((missing + step - 1) / step) * period;
    }
    Some((j as u64, period as u64))
}
