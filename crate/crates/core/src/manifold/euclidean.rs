use crate::linalg::Mat;

pub(super) fn basis(n: usize) -> Vec<Mat> {
    (0..n)
        .map(|i| {
            let mut e = Mat::zeros(n, 1);
            e[(i, 0)] = 1.0;
            e
        })
        .collect()
}
