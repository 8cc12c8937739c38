//! CNN workload graphs.
//!
//! A workload file lists layers in `[[layer]]` tables. File order defines the
//! layer index, which the scheduler uses for arbitration between layers that
//! share a processing element.

use std::collections::{BTreeMap, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerKind {
    Conv,
    Fc,
    Elementwise,
    Pool,
}

impl LayerKind {
    /// Conv, FC and pooling layers read a window of predecessor rows; elementwise
    /// layers read the pixel with the same raster index.
    pub fn is_windowed(self) -> bool {
        !matches!(self, LayerKind::Elementwise)
    }

    /// Layers executed on analog in-memory cores.
    pub fn needs_aimcore(self) -> bool {
        matches!(self, LayerKind::Conv | LayerKind::Fc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    pub name: String,
    pub kind: LayerKind,
    pub input_h: u64,
    pub input_w: u64,
    pub input_c: u64,
    pub kernel: u64,
    pub stride: u64,
    pub output_h: u64,
    pub output_w: u64,
    pub output_c: u64,
    #[serde(default)]
    pub predecessors: Vec<String>,
    pub macs_per_output_pixel: u64,
    pub buffer_reads_per_pixel: u64,
    pub buffer_writes_per_pixel: u64,
    #[serde(default)]
    pub imem_fetch_instructions: u64,
}

impl LayerSpec {
    pub fn pixel_count(&self) -> u64 {
        self.output_h * self.output_w
    }

    /// Number of weights stored for this layer (kernel² · C_in · C_out).
    pub fn weight_count(&self) -> u64 {
        self.kernel * self.kernel * self.input_c * self.output_c
    }

    fn validate_counts(&self) -> Result<()> {
        let counts = [
            ("input_h", self.input_h),
            ("input_w", self.input_w),
            ("input_c", self.input_c),
            ("kernel", self.kernel),
            ("stride", self.stride),
            ("output_h", self.output_h),
            ("output_w", self.output_w),
            ("output_c", self.output_c),
            ("macs_per_output_pixel", self.macs_per_output_pixel),
            ("buffer_reads_per_pixel", self.buffer_reads_per_pixel),
            ("buffer_writes_per_pixel", self.buffer_writes_per_pixel),
        ];
        for (field, value) in counts {
            if value == 0 {
                return Err(Error::invalid(
                    "layer",
                    format!("`{}`: {field} must be at least 1", self.name),
                ));
            }
        }
        Ok(())
    }

    /// Output extent of a valid (unpadded) window sweep over `input`.
    pub fn windowed_extent(input: u64, kernel: u64, stride: u64) -> Option<u64> {
        if kernel > input || stride == 0 {
            return None;
        }
        Some((input - kernel) / stride + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorkloadFile {
    #[serde(default)]
    name: String,
    #[serde(rename = "layer", default)]
    layers: Vec<LayerSpec>,
}

/// Validated layer DAG.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadGraph {
    pub name: String,
    layers: Vec<LayerSpec>,
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
}

impl WorkloadGraph {
    pub fn new(name: impl Into<String>, layers: Vec<LayerSpec>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::invalid("workload", "no layers"));
        }
        let mut index = BTreeMap::new();
        for (i, layer) in layers.iter().enumerate() {
            if index.insert(layer.name.clone(), i).is_some() {
                return Err(Error::invalid(
                    "workload",
                    format!("duplicate layer name `{}`", layer.name),
                ));
            }
        }
        let mut preds = vec![Vec::new(); layers.len()];
        let mut succs = vec![Vec::new(); layers.len()];
        for (i, layer) in layers.iter().enumerate() {
            layer.validate_counts()?;
            for p in &layer.predecessors {
                let j = *index.get(p).ok_or_else(|| Error::DanglingPredecessor {
                    layer: layer.name.clone(),
                    predecessor: p.clone(),
                })?;
                if preds[i].contains(&j) {
                    return Err(Error::invalid(
                        "layer",
                        format!("`{}` lists predecessor `{p}` twice", layer.name),
                    ));
                }
                preds[i].push(j);
                succs[j].push(i);
            }
        }
        let graph = WorkloadGraph {
            name: name.into(),
            layers,
            preds,
            succs,
        };
        graph.check_acyclic()?;
        for i in 0..graph.layers.len() {
            graph.check_dimensions(i)?;
        }
        Ok(graph)
    }

    pub fn parse_str(text: &str, origin: &Path) -> Result<Self> {
        let file: WorkloadFile = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::new(file.name, file.layers)
    }

    pub fn to_toml(&self) -> String {
        let file = WorkloadFile {
            name: self.name.clone(),
            layers: self.layers.clone(),
        };
        toml::to_string(&file).expect("workload serializes")
    }

    fn check_acyclic(&self) -> Result<()> {
        let n = self.layers.len();
        let mut indegree: Vec<usize> = self.preds.iter().map(Vec::len).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut seen = 0;
        while let Some(i) = queue.pop_front() {
            seen += 1;
            for &s in &self.succs[i] {
                indegree[s] -= 1;
                if indegree[s] == 0 {
                    queue.push_back(s);
                }
            }
        }
        if seen == n {
            Ok(())
        } else {
            let stuck = (0..n).find(|&i| indegree[i] > 0).unwrap();
            Err(Error::Cycle(self.layers[stuck].name.clone()))
        }
    }

    fn check_dimensions(&self, i: usize) -> Result<()> {
        let layer = &self.layers[i];
        let mismatch = |field, declared, derived| Error::DimensionMismatch {
            layer: layer.name.clone(),
            field,
            declared,
            derived,
        };
        match layer.kind {
            LayerKind::Conv if !self.preds[i].is_empty() => {
                for (field, input, declared) in [
                    ("output_h", layer.input_h, layer.output_h),
                    ("output_w", layer.input_w, layer.output_w),
                ] {
                    let derived = LayerSpec::windowed_extent(input, layer.kernel, layer.stride)
                        .ok_or_else(|| {
                            Error::invalid(
                                "layer",
                                format!("`{}`: kernel exceeds input extent", layer.name),
                            )
                        })?;
                    if derived != declared {
                        return Err(mismatch(field, declared, derived));
                    }
                }
            }
            LayerKind::Elementwise => {
                for (field, input, output) in [
                    ("input_h", layer.input_h, layer.output_h),
                    ("input_w", layer.input_w, layer.output_w),
                ] {
                    if input != output {
                        return Err(mismatch(field, input, output));
                    }
                }
                for &p in &self.preds[i] {
                    let pred = &self.layers[p];
                    if pred.output_h != layer.output_h {
                        return Err(mismatch("output_h", layer.output_h, pred.output_h));
                    }
                    if pred.output_w != layer.output_w {
                        return Err(mismatch("output_w", layer.output_w, pred.output_w));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn layer(&self, i: usize) -> &LayerSpec {
        &self.layers[i]
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn predecessors(&self, i: usize) -> &[usize] {
        &self.preds[i]
    }

    pub fn successors(&self, i: usize) -> &[usize] {
        &self.succs[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.layers.iter().position(|l| l.name == name)
    }

    pub fn edge_count(&self) -> usize {
        self.preds.iter().map(Vec::len).sum()
    }

    pub fn sources(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.layers.len()).filter(|&i| self.preds[i].is_empty())
    }
}

pub fn parse_workload(path: &Path) -> Result<WorkloadGraph> {
    WorkloadGraph::parse_str(&crate::io::read_to_string(path)?, path)
}

#[cfg(test)]
pub(crate) fn test_layer(name: &str, kind: LayerKind, out: (u64, u64)) -> LayerSpec {
    LayerSpec {
        name: name.into(),
        kind,
        input_h: out.0,
        input_w: out.1,
        input_c: 1,
        kernel: 1,
        stride: 1,
        output_h: out.0,
        output_w: out.1,
        output_c: 1,
        predecessors: vec![],
        macs_per_output_pixel: 1,
        buffer_reads_per_pixel: 1,
        buffer_writes_per_pixel: 1,
        imem_fetch_instructions: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conv_after(pred: &str, input: u64, output: u64) -> LayerSpec {
        LayerSpec {
            kernel: 3,
            input_h: input,
            input_w: input,
            output_h: output,
            output_w: output,
            predecessors: vec![pred.into()],
            ..test_layer("c", LayerKind::Conv, (output, output))
        }
    }

    #[test]
    fn single_layer_graph() {
        let g = WorkloadGraph::new("one", vec![test_layer("a", LayerKind::Conv, (4, 4))]).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.sources().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn conv_output_extent_checked() {
        // A 3-wide window fits at offsets 0 and 1 of a 4-wide input.
        let placements = (0..4u64).filter(|o| o + 3 <= 4).count() as u64;
        assert_eq!(placements, 2);
        let src = test_layer("src", LayerKind::Conv, (4, 4));
        let ok = WorkloadGraph::new("g", vec![src.clone(), conv_after("src", 4, 2)]);
        assert!(ok.is_ok());
        let bad = WorkloadGraph::new("g", vec![src, conv_after("src", 4, 3)]);
        assert!(matches!(
            bad,
            Err(Error::DimensionMismatch { declared: 3, derived: 2, .. })
        ));
    }

    #[test]
    fn dangling_and_cycle_rejected() {
        let mut a = test_layer("a", LayerKind::Pool, (2, 2));
        a.predecessors = vec!["zzz".into()];
        assert!(matches!(
            WorkloadGraph::new("g", vec![a]),
            Err(Error::DanglingPredecessor { .. })
        ));

        let mut a = test_layer("a", LayerKind::Pool, (2, 2));
        let mut b = test_layer("b", LayerKind::Pool, (2, 2));
        a.predecessors = vec!["b".into()];
        b.predecessors = vec!["a".into()];
        assert!(matches!(WorkloadGraph::new("g", vec![a, b]), Err(Error::Cycle(_))));
    }

    #[test]
    fn zero_counts_rejected() {
        let mut a = test_layer("a", LayerKind::Conv, (2, 2));
        a.macs_per_output_pixel = 0;
        assert!(WorkloadGraph::new("g", vec![a]).is_err());
        assert!(WorkloadGraph::new("g", vec![]).is_err());
    }

    #[test]
    fn elementwise_predecessors_must_match() {
        let a = test_layer("a", LayerKind::Conv, (4, 4));
        let b = test_layer("b", LayerKind::Conv, (3, 3));
        let mut add = test_layer("add", LayerKind::Elementwise, (4, 4));
        add.predecessors = vec!["a".into(), "b".into()];
        assert!(WorkloadGraph::new("g", vec![a, b, add]).is_err());
    }

    #[test]
    fn parse_reports_field() {
        let text = "[[layer]]\nname = \"a\"\nkind = \"conv\"\n";
        let err = WorkloadGraph::parse_str(text, Path::new("w.toml")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("w.toml"), "{msg}");
        assert!(msg.contains("missing field"), "{msg}");
    }

    #[test]
    fn toml_round_trip() {
        let src = test_layer("src", LayerKind::Conv, (4, 4));
        let g = WorkloadGraph::new("g", vec![src, conv_after("src", 4, 2)]).unwrap();
        let again = WorkloadGraph::parse_str(&g.to_toml(), Path::new("x")).unwrap();
        assert_eq!(g, again);
    }
}
