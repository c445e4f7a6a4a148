use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CountError {
    #[error("branching factors and level count must be positive")]
    InvalidArgument,
    #[error("tree size overflows u64")]
    Overflow,
}

/// Number of nodes in the unpruned tree with `levels` levels, Control levels
/// branching `n` ways and Measurement levels `k` ways: `1 + n + nk + n²k + …`.
pub fn full_tree_size(n: u64, k: u64, levels: u32) -> Result<u64, CountError> {
    if n == 0 || k == 0 || levels == 0 {
        return Err(CountError::InvalidArgument);
    }
    let mut width: u64 = 1;
    let mut total: u64 = 1;
    for level in 1..levels {
        let factor = if level % 2 == 1 { n } else { k };
        width = width.checked_mul(factor).ok_or(CountError::Overflow)?;
        total = total.checked_add(width).ok_or(CountError::Overflow)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reported_sizes() {
        assert_eq!(full_tree_size(4, 5, 5), Ok(505));
        assert_eq!(full_tree_size(4, 5, 13), Ok(80_842_105));
        assert_eq!(full_tree_size(1, 1, 7), Ok(7));
        assert_eq!(full_tree_size(2, 2, 5), Ok(31));
    }

    #[test]
    fn errors() {
        assert_eq!(full_tree_size(0, 5, 5), Err(CountError::InvalidArgument));
        assert_eq!(full_tree_size(4, 5, 0), Err(CountError::InvalidArgument));
        assert_eq!(full_tree_size(1000, 1000, 20), Err(CountError::Overflow));
    }
}
