//! `VKG1` binary snapshot of a dictionary plus graph.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! b"VKG1"
//! u32  flags                      bit 0: directed
//! u64  node_count (N)
//! u64  arc_count (A)              entries in the neighbor array
//! u64  name_bytes (B)
//! u64  name_offsets[N + 1]        into the name blob
//! u8   names[B]                   UTF-8, concatenated
//! u64  adjacency_offsets[N + 1]   CSR row starts
//! u32  neighbors[A]               out-lists (directed) or symmetric lists
//! ```
//!
//! In-lists of a directed graph are rebuilt on load.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::dictionary::{EntityDictionary, EntityId};
use crate::error::{Error, Result};
use crate::graph::{Csr, Directedness, KnowledgeGraph};
use crate::ingest::EdgeList;

pub const MAGIC: &[u8; 4] = b"VKG1";
const FLAG_DIRECTED: u32 = 1;

/// A graph together with the names of its nodes.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    pub dictionary: EntityDictionary,
    pub graph: KnowledgeGraph,
}

impl KnowledgeBase {
    pub fn new(dictionary: EntityDictionary, graph: KnowledgeGraph) -> Result<Self> {
        if dictionary.len() != graph.node_count() {
            return Err(Error::validation(format!(
                "dictionary has {} names but graph has {} nodes",
                dictionary.len(),
                graph.node_count()
            )));
        }
        Ok(Self { dictionary, graph })
    }

    pub fn from_edge_list(edge_list: EdgeList) -> Result<Self> {
        let graph = KnowledgeGraph::from_edges(
            edge_list.node_count(),
            &edge_list.edges,
            edge_list.directedness,
        )?;
        Self::new(edge_list.dictionary, graph)
    }

    pub fn name(&self, id: EntityId) -> &str {
        self.dictionary.name(id).unwrap_or("<unknown>")
    }

    /// Same dictionary, orientation forgotten.
    pub fn to_undirected(&self) -> KnowledgeBase {
        KnowledgeBase {
            dictionary: self.dictionary.clone(),
            graph: self.graph.to_undirected(),
        }
    }
}

pub fn encode(kb: &KnowledgeBase) -> Vec<u8> {
    let mut buf = Vec::new();
    write_to(kb, &mut buf).expect("writing to a Vec cannot fail");
    buf
}

pub fn write_to<W: Write>(kb: &KnowledgeBase, w: &mut W) -> std::io::Result<()> {
    let graph = &kb.graph;
    let csr = graph.out_csr();
    let n = graph.node_count();
    let flags = match graph.directedness() {
        Directedness::Directed => FLAG_DIRECTED,
        Directedness::Undirected => 0,
    };
    let name_bytes: u64 = kb.dictionary.names().map(|s| s.len() as u64).sum();

    w.write_all(MAGIC)?;
    w.write_all(&flags.to_le_bytes())?;
    w.write_all(&(n as u64).to_le_bytes())?;
    w.write_all(&(csr.targets.len() as u64).to_le_bytes())?;
    w.write_all(&name_bytes.to_le_bytes())?;
    let mut off = 0u64;
    w.write_all(&off.to_le_bytes())?;
    for name in kb.dictionary.names() {
        off += name.len() as u64;
        w.write_all(&off.to_le_bytes())?;
    }
    for name in kb.dictionary.names() {
        w.write_all(name.as_bytes())?;
    }
    if csr.offsets.is_empty() {
        w.write_all(&0u64.to_le_bytes())?;
    }
    for o in &csr.offsets {
        w.write_all(&o.to_le_bytes())?;
    }
    for t in &csr.targets {
        w.write_all(&t.to_le_bytes())?;
    }
    Ok(())
}

pub fn save(kb: &KnowledgeBase, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::with_capacity(1 << 20, file);
    write_to(kb, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<KnowledgeBase> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|e| match e {
        Error::Snapshot(msg) => Error::Snapshot(format!("{}: {msg}", path.display())),
        other => other,
    })
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Snapshot("truncated file".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn len(&mut self, what: &str) -> Result<usize> {
        let v = self.u64()?;
        usize::try_from(v)
            .ok()
            .filter(|&v| v <= self.bytes.len())
            .ok_or_else(|| Error::Snapshot(format!("implausible {what} {v}")))
    }

    fn u64_array(&mut self, count: usize) -> Result<Vec<u64>> {
        let raw = self.take(count.checked_mul(8).ok_or_else(|| Error::Snapshot("overflow".into()))?)?;
        Ok(raw.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn u32_array(&mut self, count: usize) -> Result<Vec<u32>> {
        let raw = self.take(count.checked_mul(4).ok_or_else(|| Error::Snapshot("overflow".into()))?)?;
        Ok(raw.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

fn check_offsets(offsets: &[u64], total: usize, what: &str) -> Result<()> {
    if offsets.first() != Some(&0)
        || offsets.last() != Some(&(total as u64))
        || offsets.windows(2).any(|w| w[0] > w[1])
    {
        return Err(Error::Snapshot(format!("corrupt {what} offsets")));
    }
    Ok(())
}

pub fn decode(bytes: &[u8]) -> Result<KnowledgeBase> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Snapshot("bad magic, expected VKG1".into()));
    }
    let flags = r.u32()?;
    if flags & !FLAG_DIRECTED != 0 {
        return Err(Error::Snapshot(format!("unknown flags {flags:#x}")));
    }
    let directedness = if flags & FLAG_DIRECTED != 0 {
        Directedness::Directed
    } else {
        Directedness::Undirected
    };
    let n = r.len("node count")?;
    let arcs = r.len("arc count")?;
    let name_bytes = r.len("name block size")?;
    if n > u32::MAX as usize {
        return Err(Error::Snapshot("node count exceeds u32 ids".into()));
    }

    let name_offsets = r.u64_array(n + 1)?;
    check_offsets(&name_offsets, name_bytes, "name")?;
    let blob = std::str::from_utf8(r.take(name_bytes)?)
        .map_err(|_| Error::Snapshot("names are not valid UTF-8".into()))?;
    let mut dictionary = EntityDictionary::with_capacity(n);
    for w in name_offsets.windows(2) {
        let name = blob
            .get(w[0] as usize..w[1] as usize)
            .ok_or_else(|| Error::Snapshot("name boundary splits a UTF-8 character".into()))?;
        let before = dictionary.len();
        if dictionary.intern(name).index() != before {
            return Err(Error::Snapshot(format!("duplicate entity name {name:?}")));
        }
    }

    let offsets = r.u64_array(n + 1)?;
    check_offsets(&offsets, arcs, "adjacency")?;
    let targets = r.u32_array(arcs)?;
    if r.pos != bytes.len() {
        return Err(Error::Snapshot("trailing bytes".into()));
    }
    for v in 0..n {
        let row = &targets[offsets[v] as usize..offsets[v + 1] as usize];
        if row.windows(2).any(|w| w[0] >= w[1]) || row.iter().any(|&t| t as usize >= n || t as usize == v) {
            return Err(Error::Snapshot(format!("corrupt adjacency row {v}")));
        }
    }
    let graph = KnowledgeGraph::from_out_csr(Csr { offsets, targets }, directedness);
    if directedness == Directedness::Undirected && graph.edge_count() * 2 != arcs {
        return Err(Error::Snapshot("undirected adjacency is not symmetric".into()));
    }
    KnowledgeBase::new(dictionary, graph)
}
