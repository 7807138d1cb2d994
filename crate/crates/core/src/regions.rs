//! Connected components of a boolean pixel mask (4-connectivity).

use std::collections::VecDeque;

/// Component labels for a row-major mask. Label 0 marks unset pixels;
/// components are numbered from 1 in scan order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    pub px_w: usize,
    pub px_h: usize,
    pub labels: Vec<u32>,
    pub count: u32,
}

impl Labels {
    pub fn at(&self, i: usize, j: usize) -> u32 {
        self.labels[j * self.px_w + i]
    }

    /// Pixel count of every component, indexed by `label - 1`.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count as usize];
        for &l in &self.labels {
            if l > 0 {
                sizes[l as usize - 1] += 1;
            }
        }
        sizes
    }
}

pub fn label_components(mask: &[bool], px_w: usize, px_h: usize) -> Labels {
    assert_eq!(mask.len(), px_w * px_h, "mask size does not match dimensions");
    let mut labels = vec![0u32; mask.len()];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..mask.len() {
        if !mask[start] || labels[start] != 0 {
            continue;
        }
        count += 1;
        labels[start] = count;
        queue.push_back(start);
        while let Some(idx) = queue.pop_front() {
            let (i, j) = (idx % px_w, idx / px_w);
            let mut visit = |n: usize| {
                if mask[n] && labels[n] == 0 {
                    labels[n] = count;
                    queue.push_back(n);
                }
            };
            if i > 0 {
                visit(idx - 1);
            }
            if i + 1 < px_w {
                visit(idx + 1);
            }
            if j > 0 {
                visit(idx - px_w);
            }
            if j + 1 < px_h {
                visit(idx + px_w);
            }
        }
    }
    Labels { px_w, px_h, labels, count }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(rows: &[&str]) -> (Vec<bool>, usize, usize) {
        let w = rows[0].len();
        let m = rows.iter().flat_map(|r| r.chars().map(|c| c == '#')).collect();
        (m, w, rows.len())
    }

    #[test]
    fn diagonal_neighbours_are_separate() {
        let (m, w, h) = mask(&["#..#", ".#.#", "...#", "##.."]);
        let l = label_components(&m, w, h);
        assert_eq!(l.count, 4);
        assert_ne!(l.at(0, 0), l.at(1, 1));
        assert_eq!(l.at(3, 0), l.at(3, 2));
        assert_eq!(l.sizes(), vec![1, 3, 1, 2]);
    }

    #[test]
    fn ring_is_one_component() {
        let (m, w, h) = mask(&["#####", "#...#", "#.#.#", "#...#", "#####"]);
        let l = label_components(&m, w, h);
        assert_eq!(l.count, 2);
        assert_eq!(l.at(1, 1), 0);
    }
}
