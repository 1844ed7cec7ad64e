use crate::eta::{EtaCell, EtaIndex, EtaTable, GRID_LEN};
use crate::risk::pattern::Combination;
use crate::scalar::Scalar;
use crate::{Error, Result};

/// Table entries converted once into the working number type.
#[derive(Clone, Debug)]
pub struct EtaView<T> {
    values: Vec<Option<T>>,
}

impl<T: Scalar> EtaView<T> {
    /// Fails if an exact type is requested from a table without exact entries.
    pub fn from_table(table: &EtaTable) -> Result<Self> {
        let mut values = vec![None; GRID_LEN];
        for (ix, cell) in table.iter() {
            if let EtaCell::Finite(e) = cell {
                let v = T::from_entry(e.value, e.exact.as_ref(), e.abs_error_bound)
                    .ok_or(Error::InexactEta { index: *ix })?;
                values[ix.slot()] = Some(v);
            }
        }
        Ok(EtaView { values })
    }

    pub fn get(&self, index: EtaIndex) -> Result<T> {
        self.values
            .get(index.slot())
            .and_then(|v| v.clone())
            .ok_or(Error::EtaUnavailable { index })
    }

    pub fn combine(&self, combination: &Combination) -> Result<T> {
        let mut acc = T::from_i64(0);
        for (c, ix) in combination {
            let term = match ix {
                None => T::from_i64(1),
                Some(ix) => self.get(*ix)?,
            };
            acc = acc + T::from_i64(*c) * term;
        }
        Ok(acc)
    }
}
