use crate::scalar::Scalar;
use crate::scene::Vec3;

/// Front-to-back compositing in ascending depth. Gaussians at equal depth do
/// not occlude each other.
pub fn blend_sort<S: Scalar>(a: &[S], c: &[Vec3<S>], d: &[S]) -> Vec3<S> {
    assert!(a.len() == c.len() && a.len() == d.len(), "blend inputs differ in length");
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).expect("depths must be finite"));
    let mut pc = [S::zero(); 3];
    let mut trans = S::one();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && d[order[end]] == d[order[start]] {
            end += 1;
        }
        let mut group = S::one();
        for &i in &order[start..end] {
            for ch in 0..3 {
                pc[ch] = pc[ch] + trans * a[i] * c[i][ch];
            }
            group = group * (S::one() - a[i]);
        }
        trans = trans * group;
        start = end;
    }
    pc
}

/// Index-free compositing: `T_i = Π_j (1 − a_j · [d_i > d_j])`.
pub fn blend_ind<S: Scalar>(a: &[S], c: &[Vec3<S>], d: &[S]) -> Vec3<S> {
    assert!(a.len() == c.len() && a.len() == d.len(), "blend inputs differ in length");
    let mut pc = [S::zero(); 3];
    for i in 0..a.len() {
        let t = (0..a.len()).fold(S::one(), |t, j| {
            let ind = if d[i] - d[j] > S::zero() { S::one() } else { S::zero() };
            t * (S::one() - a[j] * ind)
        });
        for ch in 0..3 {
            pc[ch] = pc[ch] + t * a[i] * c[i][ch];
        }
    }
    pc
}
