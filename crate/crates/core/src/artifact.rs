//! The offline pipeline and the compiled artifact it produces.
//!
//! parse → support normalization → completion → sd-DNNF → counting graph
//! → compression, plus the cycle catalog. The artifact is bound to the
//! exact program text by its SHA-256 digest.

use std::io::{Read, Write};
use std::time::Instant;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::completion::{build_completion, CnfDoc};
use crate::counting::{compress, CompressedGraph, CompressionStats, CountingGraph, SizeReport};
use crate::depgraph::{
    build_catalog, normalize_supports, CycleCatalog, CycleMode, SupportNormalization, DEFAULT_CYCLE_CAP,
};
use crate::error::Error;
use crate::inclexcl::{refine, restrict_catalog, BoundKind, RefineOptions, RefinementTrace};
use crate::lp::{parse_assumptions, parse_program, AssumptionError, AssumptionSet, Lit, Program};
use crate::nnf::{compile, parse_nnf, smooth, CompileOptions, CompileStats, VarOrder};

const ARTIFACT_MAGIC: &[u8; 8] = b"ASNAVART";
const ARTIFACT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NnfSource {
    Internal(CompileOptions),
    /// Exchange-format text produced by an external compiler for the
    /// completion's CNF.
    External(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    pub cycle_mode: CycleMode,
    pub cycle_cap: usize,
    pub nnf: NnfSource,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            cycle_mode: CycleMode::Simple,
            cycle_cap: DEFAULT_CYCLE_CAP,
            nnf: NnfSource::Internal(CompileOptions::default()),
        }
    }
}

impl BuildOptions {
    pub fn with_cycles(mode: CycleMode) -> Self {
        BuildOptions { cycle_mode: mode, ..Default::default() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub parse_s: f64,
    pub normalize_s: f64,
    pub completion_s: f64,
    pub cycles_s: f64,
    /// Obtaining the sd-DNNF (compilation or parsing, plus smoothing).
    pub sddnnf_s: f64,
    /// Building and compressing the counting graph.
    pub ccg_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArtifactStats {
    pub atoms: usize,
    pub rules: usize,
    pub tight: bool,
    pub cycles: usize,
    pub cycle_mode: CycleMode,
    pub catalog_complete: bool,
    pub support_aux_atoms: usize,
    pub cnf_vars: u32,
    pub cnf_clauses: usize,
    pub nnf: SizeReport,
    pub compressed: SizeReport,
    pub supported_count: String,
    pub compiler: String,
    pub compile: Option<CompileStats>,
    pub compression: CompressionStats,
}

#[derive(Serialize, Deserialize)]
struct Header {
    version: u32,
    digest: String,
    program_text: String,
    catalog: CycleCatalog,
    normalization: SupportNormalization,
    stats: ArtifactStats,
    timings: Timings,
}

#[derive(Clone, Debug)]
pub struct CompiledArtifact {
    pub digest: String,
    pub program_text: String,
    /// The support-normalized program; auxiliary atoms follow the visible
    /// ones.
    pub program: Program,
    pub visible_atoms: usize,
    pub normalization: SupportNormalization,
    pub graph: CompressedGraph,
    pub catalog: CycleCatalog,
    pub stats: ArtifactStats,
    pub timings: Timings,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub atom: String,
    pub count_true: String,
    pub bound_true: BoundKind,
    pub count_false: String,
    pub bound_false: BoundKind,
    /// `count_true / (count_true + count_false)` when that sum is positive.
    pub ratio_true: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FacetReport {
    pub depth: Option<usize>,
    pub facets: Vec<Facet>,
}

/// Whether `bytes` start like a saved artifact.
pub fn is_artifact(bytes: &[u8]) -> bool {
    bytes.starts_with(ARTIFACT_MAGIC)
}

pub fn digest_of(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn secs(start: Instant) -> f64 {
    start.elapsed().as_secs_f64()
}

/// Runs the offline phase on a program text.
pub fn build(text: &str, opts: &BuildOptions) -> Result<CompiledArtifact, Error> {
    let mut timings = Timings::default();
    let t = Instant::now();
    let original = parse_program(text)?;
    timings.parse_s = secs(t);

    let t = Instant::now();
    let (program, normalization) = normalize_supports(&original);
    timings.normalize_s = secs(t);

    let t = Instant::now();
    let cnf = build_completion(&program);
    timings.completion_s = secs(t);

    let t = Instant::now();
    let (dag, compile_stats, compiler) = match &opts.nnf {
        NnfSource::Internal(copts) => {
            let (dag, stats) = compile(&cnf, copts)?;
            let name = match copts.order {
                VarOrder::Index => "internal",
                VarOrder::MinFill => "internal-minfill",
            };
            (dag, Some(stats), name)
        }
        NnfSource::External(nnf_text) => {
            let dag = parse_nnf(nnf_text)?;
            if dag.num_vars() != cnf.num_vars {
                return Err(Error::Artifact(format!(
                    "external NNF has {} variables, the completion has {}",
                    dag.num_vars(),
                    cnf.num_vars
                )));
            }
            (smooth(&dag), None, "nnf-file")
        }
    };
    timings.sddnnf_s = secs(t);

    let t = Instant::now();
    let nnf_size = SizeReport { node_count: dag.node_count(), edge_count: dag.edge_count() };
    let counting = CountingGraph::new(dag, &cnf)?;
    let (graph, compression) = compress(&counting);
    let supported = graph.evaluate(&AssumptionSet::new())?;
    if supported != counting.evaluate(&AssumptionSet::new())? {
        return Err(Error::Artifact(
            "compression changed the count; an auxiliary variable is not determined by the program atoms".into(),
        ));
    }
    timings.ccg_s = secs(t);

    let t = Instant::now();
    let catalog = build_catalog(&program, opts.cycle_mode, opts.cycle_cap)?;
    timings.cycles_s = secs(t);

    let stats = ArtifactStats {
        atoms: original.atom_count(),
        rules: original.rules().len(),
        tight: catalog.tight,
        cycles: catalog.len(),
        cycle_mode: catalog.mode,
        catalog_complete: catalog.complete,
        support_aux_atoms: normalization.added_atoms.len(),
        cnf_vars: cnf.num_vars,
        cnf_clauses: cnf.clauses.len(),
        nnf: nnf_size,
        compressed: graph.size_report(),
        supported_count: supported.to_string(),
        compiler: compiler.to_owned(),
        compile: compile_stats,
        compression,
    };
    Ok(CompiledArtifact {
        digest: digest_of(text),
        program_text: text.to_owned(),
        visible_atoms: original.atom_count(),
        program,
        normalization,
        graph,
        catalog,
        stats,
        timings,
    })
}

/// `num / den` for `0 <= num <= den`, exact to 53 bits even when both
/// exceed the range of `f64`.
fn ratio(num: &BigInt, den: &BigInt) -> f64 {
    let scaled: BigInt = (num << 53u32) / den;
    scaled.to_f64().unwrap_or(f64::NAN) / (1u64 << 53) as f64
}

impl CompiledArtifact {
    /// Completion CNF of the normalized program.
    pub fn cnf(&self) -> CnfDoc {
        build_completion(&self.program)
    }

    /// Parses `a,-b`; auxiliary atoms are not addressable.
    pub fn parse_assumptions(&self, text: &str) -> Result<AssumptionSet, AssumptionError> {
        let set = parse_assumptions(&self.program, text)?;
        if let Some(l) = set.iter().find(|l| l.atom.index() >= self.visible_atoms) {
            return Err(AssumptionError::UnknownAtom(self.program.name(l.atom).to_owned()));
        }
        Ok(set)
    }

    pub fn check_program(&self, text: &str) -> Result<(), Error> {
        let given = digest_of(text);
        if given != self.digest {
            return Err(Error::DigestMismatch { artifact: self.digest.clone(), given });
        }
        Ok(())
    }

    /// Refinement over the catalog restricted to `assumptions`.
    pub fn count(&self, assumptions: &AssumptionSet, opts: &RefineOptions) -> Result<RefinementTrace, Error> {
        let catalog = restrict_catalog(&self.catalog, assumptions);
        Ok(refine(&self.graph, &catalog, assumptions, opts)?)
    }

    /// Counts with each free visible atom assumed true and false.
    pub fn facets(&self, assumptions: &AssumptionSet, opts: &RefineOptions) -> Result<FacetReport, Error> {
        let free: Vec<_> =
            (0..self.visible_atoms as u32).map(crate::lp::Atom).filter(|&a| !assumptions.mentions(a)).collect();
        let facets = free
            .par_iter()
            .map(|&a| {
                let with = |lit: Lit| {
                    let mut l = assumptions.clone();
                    l.insert(lit);
                    self.count(&l, opts)
                };
                let t = with(Lit::pos(a))?;
                let f = with(Lit::neg(a))?;
                let total: BigInt = &t.count + &f.count;
                let ratio_true = (total > BigInt::zero()).then(|| ratio(&t.count, &total));
                Ok(Facet {
                    atom: self.program.name(a).to_owned(),
                    count_true: t.count.to_string(),
                    bound_true: t.bound,
                    count_false: f.count.to_string(),
                    bound_false: f.bound,
                    ratio_true,
                })
            })
            .collect::<Result<Vec<_>, Error>>()?;
        Ok(FacetReport { depth: opts.depth, facets })
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<(), Error> {
        let header = Header {
            version: ARTIFACT_VERSION,
            digest: self.digest.clone(),
            program_text: self.program_text.clone(),
            catalog: self.catalog.clone(),
            normalization: self.normalization.clone(),
            stats: self.stats.clone(),
            timings: self.timings.clone(),
        };
        let json = serde_json::to_vec(&header).map_err(|e| Error::Artifact(e.to_string()))?;
        let ccg = self.graph.to_bytes();
        w.write_all(ARTIFACT_MAGIC)?;
        w.write_u32::<LittleEndian>(ARTIFACT_VERSION)?;
        w.write_u64::<LittleEndian>(json.len() as u64)?;
        w.write_all(&json)?;
        w.write_u64::<LittleEndian>(ccg.len() as u64)?;
        w.write_all(&ccg)?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to memory");
        out
    }

    pub fn read_from(mut r: impl Read) -> Result<Self, Error> {
        let bad = |m: &str| Error::Artifact(m.to_owned());
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != ARTIFACT_MAGIC {
            return Err(bad("not an artifact file"));
        }
        if r.read_u32::<LittleEndian>()? != ARTIFACT_VERSION {
            return Err(bad("unsupported artifact version"));
        }
        let read_block = |r: &mut dyn Read| -> Result<Vec<u8>, Error> {
            let len = r.read_u64::<LittleEndian>()?;
            let mut buf = Vec::new();
            r.take(len).read_to_end(&mut buf)?;
            if buf.len() as u64 != len {
                return Err(Error::Artifact("truncated artifact".into()));
            }
            Ok(buf)
        };
        let json = read_block(&mut r)?;
        let header: Header = serde_json::from_slice(&json).map_err(|e| Error::Artifact(e.to_string()))?;
        let graph = CompressedGraph::read_from(&read_block(&mut r)?[..])?;
        if digest_of(&header.program_text) != header.digest {
            return Err(bad("embedded program does not match its digest"));
        }
        let original = parse_program(&header.program_text)?;
        let (program, normalization) = normalize_supports(&original);
        if normalization != header.normalization || graph.atom_count() > program.atom_count() {
            return Err(bad("graph does not belong to the embedded program"));
        }
        Ok(CompiledArtifact {
            digest: header.digest,
            program_text: header.program_text,
            visible_atoms: original.atom_count(),
            program,
            normalization,
            graph,
            catalog: header.catalog,
            stats: header.stats,
            timings: header.timings,
        })
    }

    pub fn catalog_text(&self) -> String {
        self.catalog.to_text(&self.program)
    }
}
