//! Numerical invariants of a complete intersection surface, read off from
//! its multidegree.

/// `C(n + k, k)` as a polynomial in `n`, valid for negative `n` too.
fn binomial_poly(n: i64, k: i64) -> i64 {
    let mut num = 1i64;
    let mut den = 1i64;
    for j in 1..=k {
        num *= n + j;
        den *= j;
    }
    num / den
}

fn check_surface(ambient: usize, degrees: &[i64]) {
    assert_eq!(ambient, degrees.len() + 2, "not a surface");
}

/// `χ(O)` as the constant term of the Hilbert polynomial of the complete
/// intersection of forms of the given degrees in `P^ambient`.
pub fn holomorphic_euler_characteristic(ambient: usize, degrees: &[i64]) -> i64 {
    check_surface(ambient, degrees);
    let mut chi = 0;
    for mask in 0u32..(1 << degrees.len()) {
        let shift: i64 = degrees
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, d)| d)
            .sum();
        let sign = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
        chi += sign * binomial_poly(-shift, ambient as i64);
    }
    chi
}

/// Coefficients of `h^0, h^1, h^2` in `(1 + h)^(ambient+1) / Π (1 + d·h)`.
fn chern_coefficients(ambient: usize, degrees: &[i64]) -> [i64; 3] {
    let n = ambient as i64 + 1;
    let mut c = [1, n, n * (n - 1) / 2];
    for &d in degrees {
        c = [c[0], c[1] - d * c[0], c[2] - d * c[1] + d * d * c[0]];
    }
    c
}

/// Degree of the surface.
pub fn degree(degrees: &[i64]) -> i64 {
    degrees.iter().product()
}

/// `c₂` of a smooth complete intersection surface, which is also the Euler
/// number of the minimal resolution of one with only nodes.
pub fn second_chern_number(ambient: usize, degrees: &[i64]) -> i64 {
    check_surface(ambient, degrees);
    chern_coefficients(ambient, degrees)[2] * degree(degrees)
}

/// `K²`, with `K = (Σd − ambient − 1)·H`.
pub fn canonical_square(ambient: usize, degrees: &[i64]) -> i64 {
    check_surface(ambient, degrees);
    let k = -chern_coefficients(ambient, degrees)[1];
    k * k * degree(degrees)
}

/// Both sides of Noether's formula `12·χ = K² + c₂`.
pub fn noether_sides(chi: i64, k_square: i64, c2: i64) -> (i64, i64) {
    (12 * chi, k_square + c2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartic_k3() {
        assert_eq!(holomorphic_euler_characteristic(3, &[4]), 2);
        assert_eq!(second_chern_number(3, &[4]), 24);
        assert_eq!(canonical_square(3, &[4]), 0);
    }

    #[test]
    fn plane_and_quintic() {
        assert_eq!(holomorphic_euler_characteristic(3, &[1]), 1);
        assert_eq!(second_chern_number(3, &[1]), 3);
        assert_eq!(canonical_square(3, &[1]), 9);
        assert_eq!(holomorphic_euler_characteristic(3, &[5]), 5);
        assert_eq!(second_chern_number(3, &[5]), 55);
        assert_eq!(canonical_square(3, &[5]), 5);
    }

    #[test]
    fn four_quadrics_in_p6() {
        let d = [2, 2, 2, 2];
        let chi = holomorphic_euler_characteristic(6, &d);
        let c2 = second_chern_number(6, &d);
        let k2 = canonical_square(6, &d);
        assert_eq!((chi, c2, k2), (8, 80, 16));
        assert_eq!(noether_sides(chi, k2, c2), (96, 96));
    }

    #[test]
    fn noether_holds_for_complete_intersections() {
        for (n, d) in [
            (3, vec![2]),
            (3, vec![3]),
            (3, vec![6]),
            (4, vec![2, 3]),
            (5, vec![2, 2, 2]),
            (5, vec![3, 3, 2]),
        ] {
            let (l, r) = noether_sides(
                holomorphic_euler_characteristic(n, &d),
                canonical_square(n, &d),
                second_chern_number(n, &d),
            );
            assert_eq!(l, r, "{n} {d:?}");
        }
    }
}
