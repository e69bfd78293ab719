use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::FolError;

/// Interned predicate, function or constant name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SymbolId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymbolKind {
    Predicate,
    /// Functions and constants (arity 0) share one namespace.
    Function,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolInfo {
    pub name: String,
    pub kind: SymbolKind,
    pub arity: usize,
}

/// Bijective map between symbol names and ids.
///
/// Ids are dense and assigned in interning order, so a table built from the
/// same input always hands out the same ids. A name is bound to exactly one
/// kind and one arity.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(from = "Vec<SymbolInfo>", into = "Vec<SymbolInfo>")]
pub struct SymbolTable {
    symbols: Vec<SymbolInfo>,
    by_name: HashMap<String, SymbolId>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(
        &mut self,
        name: &str,
        kind: SymbolKind,
        arity: usize,
    ) -> Result<SymbolId, FolError> {
        if let Some(&id) = self.by_name.get(name) {
            let info = &self.symbols[id.0 as usize];
            if info.kind != kind {
                return Err(FolError::KindConflict {
                    name: name.to_string(),
                });
            }
            if info.arity != arity {
                return Err(FolError::ArityConflict {
                    name: name.to_string(),
                    expected: info.arity,
                    found: arity,
                });
            }
            return Ok(id);
        }
        let id = SymbolId(self.symbols.len() as u32);
        self.symbols.push(SymbolInfo {
            name: name.to_string(),
            kind,
            arity,
        });
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn lookup(&self, name: &str) -> Option<SymbolId> {
        self.by_name.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.by_name.contains_key(name)
    }

    pub fn info(&self, id: SymbolId) -> &SymbolInfo {
        &self.symbols[id.0 as usize]
    }

    pub fn name(&self, id: SymbolId) -> &str {
        &self.symbols[id.0 as usize].name
    }

    pub fn arity(&self, id: SymbolId) -> usize {
        self.symbols[id.0 as usize].arity
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (SymbolId, &SymbolInfo)> {
        self.symbols
            .iter()
            .enumerate()
            .map(|(i, info)| (SymbolId(i as u32), info))
    }
}

impl From<Vec<SymbolInfo>> for SymbolTable {
    fn from(symbols: Vec<SymbolInfo>) -> Self {
        let by_name = symbols
            .iter()
            .enumerate()
            .map(|(i, s)| (s.name.clone(), SymbolId(i as u32)))
            .collect();
        SymbolTable { symbols, by_name }
    }
}

impl From<SymbolTable> for Vec<SymbolInfo> {
    fn from(table: SymbolTable) -> Self {
        table.symbols
    }
}
