//! Pool-adjacent-violators for nondecreasing fits with unit weights.

struct Block {
    start: usize,
    len: usize,
    value: f64,
}

fn expand(blocks: &[Block], n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    for b in blocks {
        out.extend(std::iter::repeat_n(b.value, b.len));
    }
    out
}

/// Least-squares nondecreasing fit.
pub fn pava_nondecreasing(ys: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(ys.len());
    for &y in ys {
        let mut sum = y;
        let mut count = 1usize;
        while let Some(&(psum, pcount)) = blocks.last() {
            if psum / pcount as f64 > sum / count as f64 {
                sum += psum;
                count += pcount;
                blocks.pop();
            } else {
                break;
            }
        }
        blocks.push((sum, count));
    }
    let mut out = Vec::with_capacity(ys.len());
    for (sum, count) in blocks {
        let mean = sum / count as f64;
        out.extend(std::iter::repeat_n(mean, count));
    }
    out
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Least-absolute-deviation nondecreasing fit using block medians.
pub fn pava_nondecreasing_l1(ys: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<Block> = Vec::with_capacity(ys.len());
    for (i, &y) in ys.iter().enumerate() {
        let mut cur = Block { start: i, len: 1, value: y };
        while let Some(prev) = blocks.last() {
            if prev.value > cur.value {
                let start = prev.start;
                let len = prev.len + cur.len;
                blocks.pop();
                let mut pooled = ys[start..start + len].to_vec();
                cur = Block { start, len, value: median(&mut pooled) };
            } else {
                break;
            }
        }
        blocks.push(cur);
    }
    expand(&blocks, ys.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pools_violators() {
        assert_eq!(pava_nondecreasing(&[1.0, 3.0, 2.0]), vec![1.0, 2.5, 2.5]);
        assert_eq!(pava_nondecreasing(&[3.0, 2.0, 1.0]), vec![2.0, 2.0, 2.0]);
        assert_eq!(pava_nondecreasing(&[1.0, 2.0, 3.0]), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn l1_uses_medians() {
        assert_eq!(pava_nondecreasing_l1(&[1.0, 10.0, 2.0, 3.0]), vec![1.0, 3.0, 3.0, 3.0]);
        assert_eq!(pava_nondecreasing_l1(&[5.0, 1.0]), vec![3.0, 3.0]);
    }
}
