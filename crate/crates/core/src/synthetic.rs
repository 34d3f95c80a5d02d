//! Generated graphs with known answers, for demos and benchmarks.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::evaluation::StatementSet;

/// A capitals-and-countries graph. City `i` and country `i` are linked
/// directly and through a private intermediate of degree 2; every city and
/// every country also hangs off one shared hub. With the direct edge left
/// out, true pairs keep a path through a low-degree node while false pairs
/// only connect through the hub.
#[derive(Debug, Clone)]
pub struct CapitalsFixture {
    pub edges: Vec<(String, String)>,
    pub statements: StatementSet,
    pub hub: String,
}

impl CapitalsFixture {
    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (s, o) in &self.edges {
            writeln!(w, "{s}\t{o}")?;
        }
        Ok(())
    }

    pub fn statements_csv(&self) -> String {
        let mut out = String::from("subject,object,is_true\n");
        for (i, s) in self.statements.subjects.iter().enumerate() {
            for (j, o) in self.statements.objects.iter().enumerate() {
                out.push_str(&format!("{s},{o},{}\n", self.statements.truth_mask[i][j]));
            }
        }
        out
    }
}

/// `n` cities and `n` countries, so the hub has degree `2n`. `noise_edges`
/// random city-city links (seeded) blur the structure a little.
pub fn capitals(n: usize, noise_edges: usize, seed: u64) -> CapitalsFixture {
    let hub = "Hub".to_owned();
    let city = |i: usize| format!("City_{i:03}");
    let country = |i: usize| format!("Country_{i:03}");
    let mut edges = Vec::new();
    for i in 0..n {
        let via = format!("Capital_of_{i:03}");
        edges.push((city(i), country(i)));
        edges.push((city(i), via.clone()));
        edges.push((via, country(i)));
        edges.push((city(i), hub.clone()));
        edges.push((country(i), hub.clone()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut added = 0;
    while added < noise_edges && n > 1 {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b {
            edges.push((city(a), city(b)));
            added += 1;
        }
    }
    let mut statements = StatementSet::default();
    for i in 0..n {
        for j in 0..n {
            statements.push(&city(i), &country(j), i == j, (None, None));
        }
    }
    CapitalsFixture { edges, statements, hub }
}
