use std::path::Path;

use clap::ValueEnum;
use minplus::graph::{graph_to_tropical, load_edge_list, load_gml_subset, Graph};
use minplus::TropicalMatrix;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Edgelist,
    Gml,
    MatrixCsv,
}

/// A loaded input: either a graph with its tropical adjacency matrix, or a
/// bare matrix with labels `1..=n`.
pub struct Input {
    pub labels: Vec<String>,
    pub graph: Option<Graph>,
    pub matrix: TropicalMatrix,
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::data(&format!("cannot read {}", path.display()), e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::data(&format!("cannot write {}", path.display()), e))
}

pub fn read_matrix(path: &Path) -> CliResult<TropicalMatrix> {
    TropicalMatrix::from_csv(&read_text(path)?).map_err(|e| CliError::data(&path.display().to_string(), e))
}

/// A vector stored as a single CSV row or a single column.
pub fn read_vector(path: &Path) -> CliResult<Vec<f64>> {
    let m = read_matrix(path)?;
    match m.shape() {
        (1, _) | (_, 1) => Ok(m.into_vec()),
        shape => Err(CliError::Data(format!(
            "{}: expected a single row or column, found {shape:?}",
            path.display()
        ))),
    }
}

pub fn load_input(path: &Path, format: InputFormat, directed: bool) -> CliResult<Input> {
    let text = read_text(path)?;
    let context = path.display().to_string();
    let graph = match format {
        InputFormat::Edgelist => load_edge_list(&text, directed),
        InputFormat::Gml => load_gml_subset(&text),
        InputFormat::MatrixCsv => {
            let matrix = TropicalMatrix::from_csv(&text).map_err(|e| CliError::data(&context, e))?;
            let labels = (1..=matrix.rows()).map(|i| i.to_string()).collect();
            return Ok(Input { labels, graph: None, matrix });
        }
    }
    .map_err(|e| CliError::data(&context, e))?;
    Ok(Input {
        labels: graph.labels().to_vec(),
        matrix: graph_to_tropical(&graph),
        graph: Some(graph),
    })
}


/// CSV of a dense row-major table.
pub fn dense_csv(rows: usize, cols: usize, data: impl Iterator<Item = f64>) -> String {
    let values: Vec<f64> = data.collect();
    TropicalMatrix::new(rows, cols, values)
        .map(|m| m.to_csv())
        .expect("dense tables are finite")
}
