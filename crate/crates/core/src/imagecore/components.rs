use crate::imagecore::Mask;

/// 4-connected component labeling of a mask.
///
/// Labels are dense from 1 in raster order of each component's first
/// pixel; background pixels carry 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    width: u32,
    height: u32,
    labels: Vec<u32>,
    count: u32,
}

impl Labels {
    pub fn count(&self) -> u32 {
        self.count
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u32 {
        self.labels[y as usize * self.width as usize + x as usize]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.labels
    }

    /// Pixel count per label; index 0 is the background.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count as usize + 1];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }

    /// Mask of the pixels whose label satisfies `keep`.
    pub fn select(&self, mut keep: impl FnMut(u32) -> bool) -> Mask {
        let bits = self.labels.iter().map(|&l| l != 0 && keep(l)).collect();
        Mask::from_bits(self.width, self.height, bits).expect("dimensions preserved")
    }
}

fn find(parent: &mut [u32], mut a: u32) -> u32 {
    while parent[a as usize] != a {
        parent[a as usize] = parent[parent[a as usize] as usize];
        a = parent[a as usize];
    }
    a
}

/// Two-pass union-find labeling with 4-connectivity.
pub fn connected_components(mask: &Mask) -> Labels {
    let (w, h) = mask.dimensions();
    let (wu, hu) = (w as usize, h as usize);
    let mut provisional = vec![0u32; wu * hu];
    let mut parent: Vec<u32> = vec![0];

    for y in 0..hu {
        for x in 0..wu {
            let i = y * wu + x;
            if !mask.bits()[i] {
                continue;
            }
            let left = if x > 0 { provisional[i - 1] } else { 0 };
            let up = if y > 0 { provisional[i - wu] } else { 0 };
            provisional[i] = match (left, up) {
                (0, 0) => {
                    let l = parent.len() as u32;
                    parent.push(l);
                    l
                }
                (l, 0) | (0, l) => l,
                (a, b) => {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    let (lo, hi) = (ra.min(rb), ra.max(rb));
                    parent[hi as usize] = lo;
                    lo
                }
            };
        }
    }

    // Roots are visited in raster order of first appearance because a root
    // always carries the smallest provisional label of its set.
    let mut dense = vec![0u32; parent.len()];
    let mut count = 0;
    for l in 1..parent.len() as u32 {
        let root = find(&mut parent, l);
        if root == l {
            count += 1;
            dense[l as usize] = count;
        }
    }
    let labels = provisional
        .into_iter()
        .map(|l| if l == 0 { 0 } else { dense[find(&mut parent, l) as usize] })
        .collect();
    Labels {
        width: w,
        height: h,
        labels,
        count,
    }
}
