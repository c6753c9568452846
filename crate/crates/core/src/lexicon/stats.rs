use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Connotation, EntryKind, IdentityGroup, Lexicon};

/// A count per identity group plus a deduplicated total.
///
/// An entry with senses in two groups counts once in `total` and once in
/// each group column, so the group columns may sum to more than `total`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupCounts {
    pub total: u64,
    #[serde(flatten)]
    pub by_group: BTreeMap<IdentityGroup, u64>,
}

impl GroupCounts {
    fn zeroed() -> Self {
        GroupCounts {
            total: 0,
            by_group: IdentityGroup::ALL.iter().map(|g| (*g, 0)).collect(),
        }
    }

    pub fn group(&self, group: IdentityGroup) -> u64 {
        self.by_group.get(&group).copied().unwrap_or(0)
    }

    fn bump(&mut self, groups: &BTreeSet<IdentityGroup>) {
        self.total += 1;
        for g in groups {
            *self.by_group.entry(*g).or_default() += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConnotationClass {
    /// Entries with a neutral reading (including those that are also pejorative).
    Neutral,
    /// Entries with a pejorative reading (including those that are also neutral).
    Pejorative,
    /// Entries with both readings.
    Both,
}

/// Entry counts by kind and connotation class, split by identity group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub all_entries: GroupCounts,
    pub by_kind: BTreeMap<EntryKind, GroupCounts>,
    pub by_connotation: BTreeMap<ConnotationClass, GroupCounts>,
    pub sense_count: u64,
}

impl DistributionReport {
    pub fn from_lexicon(lexicon: &Lexicon) -> Self {
        let mut all_entries = GroupCounts::zeroed();
        let mut by_kind: BTreeMap<EntryKind, GroupCounts> =
            EntryKind::ALL.iter().map(|k| (*k, GroupCounts::zeroed())).collect();
        let mut by_connotation: BTreeMap<ConnotationClass, GroupCounts> = [
            ConnotationClass::Neutral,
            ConnotationClass::Pejorative,
            ConnotationClass::Both,
        ]
        .into_iter()
        .map(|c| (c, GroupCounts::zeroed()))
        .collect();

        for entry in lexicon.entries() {
            let groups = lexicon.groups_of(entry.id);
            all_entries.bump(&groups);
            by_kind
                .get_mut(&entry.entry_kind)
                .expect("all kinds present")
                .bump(&groups);

            let mut overall: BTreeSet<Connotation> = BTreeSet::new();
            let mut per_group: BTreeMap<IdentityGroup, BTreeSet<Connotation>> = BTreeMap::new();
            for sense in lexicon.senses_of(entry.id) {
                overall.extend(sense.connotations.iter().copied());
                per_group
                    .entry(sense.identity_group)
                    .or_default()
                    .extend(sense.connotations.iter().copied());
            }
            for (class, counts) in by_connotation.iter_mut() {
                if class_holds(*class, &overall) {
                    counts.total += 1;
                }
                for (group, set) in &per_group {
                    if class_holds(*class, set) {
                        *counts.by_group.entry(*group).or_default() += 1;
                    }
                }
            }
        }

        DistributionReport {
            all_entries,
            by_kind,
            by_connotation,
            sense_count: lexicon.senses().len() as u64,
        }
    }

    pub fn kind(&self, kind: EntryKind) -> &GroupCounts {
        &self.by_kind[&kind]
    }

    pub fn connotation(&self, class: ConnotationClass) -> &GroupCounts {
        &self.by_connotation[&class]
    }
}

fn class_holds(class: ConnotationClass, set: &BTreeSet<Connotation>) -> bool {
    let neutral = set.contains(&Connotation::Neutral);
    let pejorative = set.contains(&Connotation::Pejorative);
    match class {
        ConnotationClass::Neutral => neutral,
        ConnotationClass::Pejorative => pejorative,
        ConnotationClass::Both => neutral && pejorative,
    }
}

/// One published count set against the observed value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deviation {
    pub figure: String,
    pub published: u64,
    pub observed: u64,
    pub matches: bool,
}

// (label, total, RNE, RELIGION, SOGIESC)
const PUBLISHED_ROWS: [(&str, u64, u64, u64, u64); 7] = [
    ("all_entries", 15123, 13762, 355, 1046),
    ("head_entries", 1277, 1278, 25, 121),
    ("person_noun_compound_entries", 10090, 9256, 260, 600),
    ("other_related_form_entries", 3592, 3233, 70, 299),
    ("neutral", 15031, 13734, 355, 1054),
    ("pejorative", 216, 113, 34, 137),
    ("both", 124, 30, 17, 60),
];

// Totals quoted in running text rather than the distribution tables.
const PUBLISHED_SCALARS: [(&str, u64); 5] = [
    ("head_entries_text", 1419),
    ("related_forms_text", 13709),
    ("sense_entries_text", 15270),
    ("head_entries_comparison_table", 1565),
    ("variants_comparison_table", 14148),
];

/// Compares a report with every published distribution figure.
///
/// The published figures disagree with each other in places, so this never
/// fails; it lists each figure with the observed value and whether they match.
pub fn compare_to_published(report: &DistributionReport) -> Vec<Deviation> {
    let mut checks = Vec::new();
    let related_total = report.kind(EntryKind::PersonNounCompound).total
        + report.kind(EntryKind::RelatedForm).total;
    for (label, total, rne, religion, sogiesc) in PUBLISHED_ROWS {
        let observed = match label {
            "all_entries" => &report.all_entries,
            "head_entries" => report.kind(EntryKind::Head),
            "person_noun_compound_entries" => report.kind(EntryKind::PersonNounCompound),
            "other_related_form_entries" => report.kind(EntryKind::RelatedForm),
            "neutral" => report.connotation(ConnotationClass::Neutral),
            "pejorative" => report.connotation(ConnotationClass::Pejorative),
            _ => report.connotation(ConnotationClass::Both),
        };
        let cells = [
            ("total", total, observed.total),
            ("RNE", rne, observed.group(IdentityGroup::Rne)),
            ("RELIGION", religion, observed.group(IdentityGroup::Religion)),
            ("SOGIESC", sogiesc, observed.group(IdentityGroup::Sogiesc)),
        ];
        for (column, published, observed) in cells {
            checks.push(Deviation {
                figure: format!("{label}.{column}"),
                published,
                observed,
                matches: published == observed,
            });
        }
    }
    for (label, published) in PUBLISHED_SCALARS {
        let observed = match label {
            "head_entries_text" | "head_entries_comparison_table" => {
                report.kind(EntryKind::Head).total
            }
            "sense_entries_text" => report.sense_count,
            _ => related_total,
        };
        checks.push(Deviation {
            figure: label.to_string(),
            published,
            observed,
            matches: published == observed,
        });
    }
    checks
}
