use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use log::warn;

use super::{
    normalize_seed_term, Connotation, EntryId, EntryKind, IdentityGroup, LexicalEntry, Lexicon,
    SenseContext,
};
use crate::error::{Error, Result};

const TERM: &str = "term";
const HEAD_TERM: &str = "head_term";
const IS_HEAD: &str = "is_head";
const GROUP: &str = "identity_group";
const SUBGROUP: &str = "subgroup";
const CONNOTATION: &str = "connotation";
const NON_IDENTITY: &str = "non_identity";
const ENTRY_KIND: &str = "entry_kind";
const POS: &str = "pos";
const PROVENANCE: &str = "provenance";

const REQUIRED: [&str; 8] = [
    TERM,
    HEAD_TERM,
    IS_HEAD,
    GROUP,
    SUBGROUP,
    CONNOTATION,
    NON_IDENTITY,
    ENTRY_KIND,
];

fn canonical_column(raw: &str) -> String {
    let mut key = String::new();
    for ch in raw.trim().chars() {
        if ch.is_ascii_alphanumeric() {
            key.push(ch.to_ascii_lowercase());
        } else if !key.ends_with('_') && !key.is_empty() {
            key.push('_');
        }
    }
    let key = key.trim_end_matches('_').to_string();
    match key.as_str() {
        "headterm" | "head" | "head_form" => HEAD_TERM.to_string(),
        "is_head_flag" | "ishead" | "head_flag" => IS_HEAD.to_string(),
        "identitygroup" | "group" => GROUP.to_string(),
        "identity_subgroup" | "identitysubgroup" => SUBGROUP.to_string(),
        "non_identity_flag" | "has_non_identity_sense" | "nonidentity" | "non_identity_usage" => {
            NON_IDENTITY.to_string()
        }
        "kind" | "entrykind" => ENTRY_KIND.to_string(),
        "part_of_speech" => POS.to_string(),
        "source" | "citation" => PROVENANCE.to_string(),
        _ => key,
    }
}

fn parse_flag(cell: &str) -> Option<bool> {
    match cell.trim().to_ascii_lowercase().as_str() {
        "true" | "t" | "1" | "yes" | "y" => Some(true),
        "false" | "f" | "0" | "no" | "n" | "" => Some(false),
        _ => None,
    }
}

struct Columns {
    index: HashMap<String, usize>,
    extras: Vec<(String, usize)>,
}

impl Columns {
    fn from_header(header: &csv::StringRecord) -> Result<Self> {
        let mut index = HashMap::new();
        let mut extras = Vec::new();
        for (pos, raw) in header.iter().enumerate() {
            let key = canonical_column(raw);
            let known = REQUIRED.contains(&key.as_str()) || key == POS || key == PROVENANCE;
            if index.contains_key(&key) {
                return Err(Error::Format {
                    line: 1,
                    column: Some(raw.to_string()),
                    message: "duplicate column".to_string(),
                });
            }
            if !known {
                extras.push((raw.trim().to_string(), pos));
            }
            index.insert(key, pos);
        }
        let missing: Vec<&str> = REQUIRED
            .iter()
            .copied()
            .filter(|c| !index.contains_key(*c))
            .collect();
        if !missing.is_empty() {
            return Err(Error::Format {
                line: 1,
                column: Some(missing.join(", ")),
                message: "missing required column(s)".to_string(),
            });
        }
        Ok(Columns { index, extras })
    }

    fn get<'r>(&self, record: &'r csv::StringRecord, column: &str) -> &'r str {
        self.index
            .get(column)
            .and_then(|&i| record.get(i))
            .unwrap_or("")
    }
}

type EntryKey = (String, Option<String>);

struct Builder {
    entries: Vec<PendingEntry>,
    by_key: HashMap<EntryKey, EntryId>,
    senses: Vec<SenseContext>,
    sense_by_key: HashMap<(EntryId, IdentityGroup, String), usize>,
}

struct PendingEntry {
    surface: String,
    head_surface: Option<String>,
    kind: EntryKind,
    pos: Option<String>,
    first_row: usize,
}

/// Reads a lexicon from tabular CSV text.
pub fn read_lexicon<R: Read>(reader: R) -> Result<Lexicon> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let header = csv_reader.headers()?.clone();
    let columns = Columns::from_header(&header)?;

    let mut builder = Builder {
        entries: Vec::new(),
        by_key: HashMap::new(),
        senses: Vec::new(),
        sense_by_key: HashMap::new(),
    };

    for record in csv_reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::format(line, e.to_string())
        })?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        builder.add_row(&columns, &record, row)?;
    }

    builder.finish(columns.extras.into_iter().map(|(name, _)| name).collect())
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<Lexicon> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_lexicon(std::io::BufReader::new(file))
}

impl Builder {
    fn add_row(&mut self, columns: &Columns, record: &csv::StringRecord, row: usize) -> Result<()> {
        let format_err = |column: &str, message: String| Error::Format {
            line: row,
            column: Some(column.to_string()),
            message,
        };

        let surface = normalize_seed_term(columns.get(record, TERM));
        if surface.is_empty() {
            warn!("lexicon row {row}: term normalizes to an empty string, skipped");
            return Ok(());
        }
        let is_head = parse_flag(columns.get(record, IS_HEAD)).ok_or_else(|| {
            format_err(
                IS_HEAD,
                format!("not a boolean: `{}`", columns.get(record, IS_HEAD)),
            )
        })?;
        let kind: EntryKind = columns
            .get(record, ENTRY_KIND)
            .parse()
            .map_err(|m| format_err(ENTRY_KIND, m))?;
        if is_head != (kind == EntryKind::Head) {
            return Err(Error::Integrity {
                row: Some(row),
                message: format!(
                    "`{surface}`: head flag {is_head} contradicts entry kind {}",
                    kind.as_str()
                ),
            });
        }
        let head_cell = normalize_seed_term(columns.get(record, HEAD_TERM));
        let head_surface = if is_head {
            if !head_cell.is_empty() && head_cell != surface {
                return Err(Error::Integrity {
                    row: Some(row),
                    message: format!("head entry `{surface}` names a different head `{head_cell}`"),
                });
            }
            None
        } else {
            if head_cell.is_empty() {
                return Err(Error::Integrity {
                    row: Some(row),
                    message: format!("related form `{surface}` has no head term"),
                });
            }
            Some(head_cell)
        };
        let group: IdentityGroup = columns.get(record, GROUP).parse().map_err(|m| Error::Integrity {
            row: Some(row),
            message: m,
        })?;
        let subgroup = columns.get(record, SUBGROUP).trim().to_lowercase();
        let connotations = Connotation::parse_set(columns.get(record, CONNOTATION))
            .map_err(|m| format_err(CONNOTATION, m))?;
        let non_identity = parse_flag(columns.get(record, NON_IDENTITY)).ok_or_else(|| {
            format_err(
                NON_IDENTITY,
                format!("not a boolean: `{}`", columns.get(record, NON_IDENTITY)),
            )
        })?;
        let pos = Some(columns.get(record, POS).trim().to_ascii_uppercase()).filter(|p| !p.is_empty());
        let provenance = columns.get(record, PROVENANCE).trim().to_string();
        let extra: BTreeMap<String, String> = columns
            .extras
            .iter()
            .map(|(name, i)| (name.clone(), record.get(*i).unwrap_or("").to_string()))
            .collect();

        let key = (surface.clone(), head_surface.clone());
        let entry_id = match self.by_key.get(&key) {
            Some(&id) => {
                let pending = &mut self.entries[id.0 as usize];
                if pending.kind != kind {
                    return Err(Error::Integrity {
                        row: Some(row),
                        message: format!(
                            "`{surface}` listed as {} here but {} at row {}",
                            kind.as_str(),
                            pending.kind.as_str(),
                            pending.first_row
                        ),
                    });
                }
                if pending.pos.is_none() {
                    pending.pos = pos;
                }
                id
            }
            None => {
                let id = EntryId(self.entries.len() as u32);
                self.entries.push(PendingEntry {
                    surface: surface.clone(),
                    head_surface,
                    kind,
                    pos,
                    first_row: row,
                });
                self.by_key.insert(key, id);
                id
            }
        };

        match self.sense_by_key.get(&(entry_id, group, subgroup.clone())) {
            Some(&idx) => {
                let sense = &mut self.senses[idx];
                sense.connotations.extend(connotations);
                sense.has_non_identity_sense |= non_identity;
                if !provenance.is_empty()
                    && !sense.provenance.split("; ").any(|p| p == provenance)
                {
                    if !sense.provenance.is_empty() {
                        sense.provenance.push_str("; ");
                    }
                    sense.provenance.push_str(&provenance);
                }
            }
            None => {
                self.sense_by_key
                    .insert((entry_id, group, subgroup.clone()), self.senses.len());
                self.senses.push(SenseContext {
                    entry_ref: entry_id,
                    identity_group: group,
                    subgroup,
                    connotations,
                    has_non_identity_sense: non_identity,
                    provenance,
                    extra,
                });
            }
        }
        Ok(())
    }

    fn finish(self, extra_columns: Vec<String>) -> Result<Lexicon> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for (pos, pending) in self.entries.iter().enumerate() {
            let (head_ref, lemma) = match &pending.head_surface {
                None => (None, pending.surface.clone()),
                Some(head) => match self.by_key.get(&(head.clone(), None)) {
                    Some(&id) => (Some(id), head.clone()),
                    None => {
                        return Err(Error::Integrity {
                            row: Some(pending.first_row),
                            message: format!(
                                "`{}` references head `{head}`, which is not a head entry",
                                pending.surface
                            ),
                        })
                    }
                },
            };
            entries.push(LexicalEntry {
                id: EntryId(pos as u32),
                surface: pending.surface.clone(),
                lemma,
                is_head: pending.head_surface.is_none(),
                head_ref,
                entry_kind: pending.kind,
                pos: pending.pos.clone(),
            });
        }
        Lexicon::from_parts(entries, self.senses, extra_columns)
    }
}

/// Writes the lexicon back to the tabular format, one row per sense.
pub fn write_lexicon<W: Write>(lexicon: &Lexicon, writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = REQUIRED.to_vec();
    header.extend([POS, PROVENANCE]);
    header.extend(lexicon.extra_columns().iter().map(String::as_str));
    out.write_record(&header)?;

    let extras: BTreeSet<&String> = lexicon.extra_columns().iter().collect();
    for entry in lexicon.entries() {
        let head = entry
            .head_ref
            .and_then(|h| lexicon.entry(h))
            .map(|h| h.surface.as_str())
            .unwrap_or("");
        for sense in lexicon.senses_of(entry.id) {
            let mut row: Vec<String> = vec![
                entry.surface.clone(),
                head.to_string(),
                entry.is_head.to_string(),
                sense.identity_group.to_string(),
                sense.subgroup.clone(),
                Connotation::format_set(&sense.connotations).to_string(),
                sense.has_non_identity_sense.to_string(),
                entry.entry_kind.as_str().to_string(),
                entry.pos.clone().unwrap_or_default(),
                sense.provenance.clone(),
            ];
            for name in lexicon.extra_columns() {
                debug_assert!(extras.contains(name));
                row.push(sense.extra.get(name).cloned().unwrap_or_default());
            }
            out.write_record(&row)?;
        }
    }
    out.flush().map_err(|e| Error::io("<lexicon output>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str =
        "term,head term,is-head,identity group,subgroup,connotation,non-identity,entry kind\n";

    fn read(body: &str) -> Result<Lexicon> {
        read_lexicon(format!("{HEADER}{body}").as_bytes())
    }

    #[test]
    fn three_row_fixture_indices() {
        let lex = read(
            "muslim,,true,RELIGION,muslim,NEUTRAL,false,HEAD\n\
             muslims,muslim,false,RELIGION,muslim,NEUTRAL,false,RELATED_FORM\n\
             muslim man,muslim,false,RELIGION,muslim,NEUTRAL,false,PERSON_NOUN_COMPOUND\n",
        )
        .unwrap();
        assert_eq!(lex.lemma_key_count(), 1);
        assert_eq!(lex.surface_key_count(), 3);
        assert_eq!(lex.max_surface_words(), 2);
        let related = lex.lookup_surface("muslims");
        assert_eq!(related.len(), 1);
        assert_eq!(related[0].lemma, "muslim");
        assert_eq!(related[0].head_ref, Some(EntryId(0)));
    }

    #[test]
    fn empty_body() {
        let lex = read("").unwrap();
        assert!(lex.is_empty());
        assert_eq!(lex.surface_key_count(), 0);
    }

    #[test]
    fn conflicting_connotations_merge() {
        let lex = read(
            "queer,,true,SOGIESC,queer,NEUTRAL,false,HEAD\n\
             queer,,true,SOGIESC,queer,PEJORATIVE,true,HEAD\n",
        )
        .unwrap();
        assert_eq!(lex.len(), 1);
        assert_eq!(lex.senses().len(), 1);
        let sense = &lex.senses()[0];
        assert_eq!(sense.connotations.len(), 2);
        assert!(sense.has_non_identity_sense);
    }

    #[test]
    fn separate_groups_are_separate_senses() {
        let lex = read(
            "jewish,,true,RELIGION,jewish,NEUTRAL,false,HEAD\n\
             jewish,,true,RNE,jewish,NEUTRAL,false,HEAD\n",
        )
        .unwrap();
        assert_eq!(lex.len(), 1);
        assert_eq!(lex.senses_of(EntryId(0)).count(), 2);
    }

    #[test]
    fn missing_column_is_format_error() {
        let err = read_lexicon("term,is_head\nblack,true\n".as_bytes()).unwrap_err();
        match err {
            Error::Format { line, column, .. } => {
                assert_eq!(line, 1);
                assert!(column.unwrap().contains("identity_group"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dangling_head_is_integrity_error() {
        let err = read("blacks,black,false,RNE,black,NEUTRAL,false,RELATED_FORM\n").unwrap_err();
        assert!(matches!(err, Error::Integrity { row: Some(2), .. }), "{err:?}");
    }

    #[test]
    fn unknown_group_names_row() {
        let err = read(
            "black,,true,RNE,black,NEUTRAL,true,HEAD\n\
             dalit,,true,CASTE,dalit,NEUTRAL,false,HEAD\n",
        )
        .unwrap_err();
        assert!(matches!(err, Error::Integrity { row: Some(3), .. }), "{err:?}");
    }

    #[test]
    fn bad_flag_reports_column() {
        let err = read("black,,maybe,RNE,black,NEUTRAL,true,HEAD\n").unwrap_err();
        match err {
            Error::Format { line, column, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column.as_deref(), Some(IS_HEAD));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn extra_columns_are_kept() {
        let lex = read_lexicon(
            "term,head_term,is_head,identity_group,subgroup,connotation,non_identity,entry_kind,grammatical gender\n\
             latina,,true,RNE,latino,NEUTRAL,false,HEAD,feminine\n"
                .as_bytes(),
        )
        .unwrap();
        assert_eq!(lex.extra_columns(), ["grammatical gender"]);
        assert_eq!(lex.senses()[0].extra["grammatical gender"], "feminine");
    }

    #[test]
    fn surfaces_are_normalized_on_load() {
        let lex = read("Afro-American,,true,RNE,black,NEUTRAL,false,HEAD\n").unwrap();
        assert_eq!(lex.entries()[0].surface, "afro american");
    }
}
