//! Seeded force-directed layout with a component packing pass.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cocitation::CoCitationNetwork;
use crate::graph::WeightedGraph;

/// Gap between packed component bounding boxes, in layout units.
const COMPONENT_GAP: f64 = 1.5;

pub type Positions = BTreeMap<String, (f64, f64)>;

/// Fruchterman–Reingold on one component; ideal edge length is 1.
fn force_directed(graph: &WeightedGraph, nodes: &[usize], seed: u64, iterations: usize) -> Vec<(f64, f64)> {
    let n = nodes.len();
    if n == 1 {
        return vec![(0.0, 0.0)];
    }
    let local: HashMap<usize, usize> = nodes.iter().enumerate().map(|(i, &g)| (g, i)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = (n as f64).sqrt();
    let mut pos: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen_range(-spread..spread), rng.gen_range(-spread..spread)))
        .collect();
    let edges: Vec<(usize, usize, f64)> = nodes
        .iter()
        .flat_map(|&g| {
            let a = local[&g];
            graph.adj[g]
                .iter()
                .filter(move |&&(h, _)| h > g)
                .map(move |&(h, w)| (a, h, w))
        })
        .map(|(a, h, w)| (a, local[&h], w))
        .collect();
    let k = 1.0f64;
    // Beyond this distance repulsion is ignored; grid cells of this size
    // keep each iteration near-linear.
    let cutoff = 3.0 * k;
    let mut temperature = spread;
    let cooling = temperature / (iterations.max(1) as f64);
    for _ in 0..iterations {
        let mut disp = vec![(0.0f64, 0.0f64); n];
        let mut grid: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
        for (i, &(x, y)) in pos.iter().enumerate() {
            grid.entry(((x / cutoff).floor() as i64, (y / cutoff).floor() as i64)).or_default().push(i);
        }
        for (&(cx, cy), cell) in &grid {
            for dx in -1..=1 {
                for dy in -1..=1 {
                    let Some(other) = grid.get(&(cx + dx, cy + dy)) else { continue };
                    for &i in cell {
                        for &j in other {
                            if i == j {
                                continue;
                            }
                            let (mut ddx, mut ddy) = (pos[i].0 - pos[j].0, pos[i].1 - pos[j].1);
                            let mut d2 = ddx * ddx + ddy * ddy;
                            if d2 < 1e-12 {
                                // coincident points: push apart along a fixed, index-derived direction
                                let angle = (i * 7919 + j) as f64;
                                ddx = angle.cos() * 1e-3;
                                ddy = angle.sin() * 1e-3;
                                d2 = 1e-6;
                            }
                            if d2 > cutoff * cutoff {
                                continue;
                            }
                            let f = k * k / d2;
                            disp[i].0 += ddx * f;
                            disp[i].1 += ddy * f;
                        }
                    }
                }
            }
        }
        for &(a, b, w) in &edges {
            let (dx, dy) = (pos[a].0 - pos[b].0, pos[a].1 - pos[b].1);
            let d = (dx * dx + dy * dy).sqrt();
            if d == 0.0 {
                continue;
            }
            let f = d * w.sqrt() / k;
            disp[a].0 -= dx * f;
            disp[a].1 -= dy * f;
            disp[b].0 += dx * f;
            disp[b].1 += dy * f;
        }
        for (p, d) in pos.iter_mut().zip(&disp) {
            let len = (d.0 * d.0 + d.1 * d.1).sqrt();
            if len > 0.0 {
                let step = len.min(temperature);
                p.0 += d.0 / len * step;
                p.1 += d.1 / len * step;
            }
        }
        temperature = (temperature - cooling).max(0.01);
    }
    pos
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundingBox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl BoundingBox {
    pub fn of<'a>(points: impl IntoIterator<Item = &'a (f64, f64)>) -> Option<BoundingBox> {
        let mut it = points.into_iter();
        let &(x, y) = it.next()?;
        let mut b = BoundingBox { min_x: x, min_y: y, max_x: x, max_y: y };
        for &(x, y) in it {
            b.min_x = b.min_x.min(x);
            b.min_y = b.min_y.min(y);
            b.max_x = b.max_x.max(x);
            b.max_y = b.max_y.max(y);
        }
        Some(b)
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn overlaps(&self, other: &BoundingBox) -> bool {
        self.min_x <= other.max_x && other.min_x <= self.max_x && self.min_y <= other.max_y && other.min_y <= self.max_y
    }
}

/// Node indices of one component, their local coordinates and extent.
type PlacedComponent = (Vec<usize>, Vec<(f64, f64)>, BoundingBox);

/// Deterministic layout: each connected component is laid out
/// independently from a seed-derived start, then components are packed
/// onto shelves (largest first) so their bounding boxes do not overlap.
/// The first component's bounding box starts at the origin.
pub fn layout(network: &CoCitationNetwork, seed: u64, iterations: usize) -> Positions {
    let graph = network.graph();
    let mut components = graph.components_bfs();
    components.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));

    let mut placed: Vec<PlacedComponent> = components
        .into_iter()
        .enumerate()
        .map(|(ci, comp)| {
            let mut pts = force_directed(&graph, &comp, seed.wrapping_add(ci as u64), iterations);
            let bb = BoundingBox::of(&pts).expect("component is non-empty");
            for p in &mut pts {
                p.0 -= bb.min_x;
                p.1 -= bb.min_y;
            }
            let bb = BoundingBox { min_x: 0.0, min_y: 0.0, max_x: bb.width(), max_y: bb.height() };
            (comp, pts, bb)
        })
        .collect();

    let total_area: f64 = placed.iter().map(|(_, _, b)| (b.width() + COMPONENT_GAP) * (b.height() + COMPONENT_GAP)).sum();
    let widest = placed.iter().map(|(_, _, b)| b.width()).fold(0.0, f64::max);
    let shelf_width = total_area.sqrt().max(widest);
    let (mut x, mut y, mut shelf_height) = (0.0f64, 0.0f64, 0.0f64);
    let mut out = Positions::new();
    for (comp, pts, bb) in &mut placed {
        if x > 0.0 && x + bb.width() > shelf_width {
            x = 0.0;
            y += shelf_height + COMPONENT_GAP;
            shelf_height = 0.0;
        }
        for (&g, p) in comp.iter().zip(pts.iter()) {
            out.insert(graph.ids[g].clone(), (p.0 + x, p.1 + y));
        }
        x += bb.width() + COMPONENT_GAP;
        shelf_height = shelf_height.max(bb.height());
    }
    out
}

/// Bounding box of each connected component under `positions`.
pub fn component_boxes(network: &CoCitationNetwork, positions: &Positions) -> Vec<BoundingBox> {
    let graph = network.graph();
    graph
        .components_bfs()
        .iter()
        .filter_map(|c| BoundingBox::of(c.iter().map(|&i| &positions[&graph.ids[i]])))
        .collect()
}
