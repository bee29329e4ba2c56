//! S-boxes over a finite abelian group and the S-box derived round function.
//!
//! An S-box has `|G|^i` rows and `|G|^j` columns; each entry is a `j`-nit word
//! stored as its integer code. A block of `i + j` nits selects a cell: the row
//! digits are the first `ceil(i/2)` nits followed by the last `floor(i/2)`
//! nits, the column digits are the `j` nits in between. For `i = 2, j = 3`
//! this is the familiar `(n1, n5)` row / `(n2, n3, n4)` column convention.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::permnet::{CipherParams, CipherSpec, RoundFunction, WireMap};
use crate::word::Word;

const MAX_CELLS: u64 = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SBox {
    group: GroupSpec,
    i: usize,
    j: usize,
    rows: usize,
    cols: usize,
    table: Vec<u32>,
}

/// One S-box evaluation, as reported in traces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SBoxStep {
    pub input: String,
    pub row: usize,
    pub col: usize,
    pub entry: u32,
    pub output: String,
}

/// Result of [`SBox::audit`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SBoxAudit {
    pub affine: bool,
    pub rows: Vec<RowAudit>,
}

impl SBoxAudit {
    pub fn all_rows_surjective(&self) -> bool {
        self.rows.iter().all(|r| r.surjective)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowAudit {
    pub row: usize,
    pub surjective: bool,
    pub missing: Vec<u32>,
    pub duplicated: Vec<u32>,
}

fn pow_checked(base: u64, exp: usize) -> Result<u64> {
    (0..exp).try_fold(1u64, |acc, _| {
        acc.checked_mul(base)
            .filter(|&v| v <= MAX_CELLS)
            .ok_or_else(|| Error::Capacity(format!("{base}^{exp} is too large for an S-box")))
    })
}

fn to_digits(mut code: u64, base: u64, len: usize) -> Vec<u32> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = (code % base) as u32;
        code /= base;
    }
    out
}

fn from_digits(digits: impl IntoIterator<Item = u32>, base: u64) -> u64 {
    digits.into_iter().fold(0, |acc, d| acc * base + d as u64)
}

impl SBox {
    /// Builds a box from its row-major table of entry codes.
    pub fn new(group: GroupSpec, i: usize, j: usize, table: Vec<u32>) -> Result<Self> {
        if j == 0 {
            return Err(Error::Dimension("S-box entries need at least one nit".into()));
        }
        let rows = pow_checked(group.order(), i)?;
        let cols = pow_checked(group.order(), j)?;
        if rows.checked_mul(cols).filter(|&c| c <= MAX_CELLS).is_none() {
            return Err(Error::Capacity(format!("{rows}x{cols} S-box is too large")));
        }
        if table.len() as u64 != rows * cols {
            return Err(Error::Dimension(format!(
                "S-box needs {rows}x{cols} = {} entries, got {}",
                rows * cols,
                table.len()
            )));
        }
        if let Some(p) = table.iter().position(|&v| v as u64 >= cols) {
            return Err(Error::Range(format!(
                "S-box entry at row {}, column {} is {}, must be < {cols}",
                p as u64 / cols,
                p as u64 % cols,
                table[p]
            )));
        }
        Ok(SBox {
            group,
            i,
            j,
            rows: rows as usize,
            cols: cols as usize,
            table,
        })
    }

    pub fn from_rows(group: GroupSpec, i: usize, j: usize, rows: &[Vec<u32>]) -> Result<Self> {
        SBox::new(group, i, j, rows.concat())
    }

    /// A seeded random box. With `enforce_row_surjective` every row is a
    /// uniformly random permutation of the `|G|^j` outputs.
    pub fn generate(
        group: GroupSpec,
        i: usize,
        j: usize,
        seed: u64,
        enforce_row_surjective: bool,
    ) -> Result<Self> {
        let rows = pow_checked(group.order(), i)? as usize;
        let cols = pow_checked(group.order(), j)? as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut table = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            if enforce_row_surjective {
                let mut row: Vec<u32> = (0..cols as u32).collect();
                row.shuffle(&mut rng);
                table.extend(row);
            } else {
                table.extend((0..cols).map(|_| rng.gen_range(0..cols as u32)));
            }
        }
        SBox::new(group, i, j, table)
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn i(&self) -> usize {
        self.i
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.table[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entry(&self, row: usize, col: usize) -> u32 {
        self.table[row * self.cols + col]
    }

    pub fn block_len(&self) -> usize {
        self.i + self.j
    }

    fn split_block(&self, nits: &[u32]) -> (Vec<u32>, Vec<u32>) {
        let front = self.i.div_ceil(2);
        let back = self.i / 2;
        let n = nits.len();
        let row_digits = nits[..front].iter().chain(&nits[n - back..]).copied().collect();
        let col_digits = nits[front..front + self.j].to_vec();
        (row_digits, col_digits)
    }

    /// Row and column selected by an `(i + j)`-nit block.
    pub fn locate(&self, block: &Word) -> Result<(usize, usize)> {
        if block.len() != self.block_len() || block.group() != &self.group {
            return Err(Error::Dimension(format!(
                "S-box input must be {} nits over {}, got {} nits over {}",
                self.block_len(),
                self.group,
                block.len(),
                block.group()
            )));
        }
        Ok(self.locate_digits(block.nits()))
    }

    fn locate_digits(&self, nits: &[u32]) -> (usize, usize) {
        let base = self.group.order();
        let (r, c) = self.split_block(nits);
        (from_digits(r, base) as usize, from_digits(c, base) as usize)
    }

    fn entry_word(&self, entry: u32) -> Word {
        Word::from_u64(entry as u64, &self.group, self.j).expect("entry below |G|^j")
    }

    pub fn lookup(&self, block: &Word) -> Result<Word> {
        let (r, c) = self.locate(block)?;
        Ok(self.entry_word(self.entry(r, c)))
    }

    pub fn lookup_step(&self, block: &Word) -> Result<SBoxStep> {
        let (row, col) = self.locate(block)?;
        let entry = self.entry(row, col);
        Ok(SBoxStep {
            input: block.to_string(),
            row,
            col,
            entry,
            output: self.entry_word(entry).to_string(),
        })
    }

    /// Per-row surjectivity scan and an exhaustive affineness test of the full
    /// `(i + j)`-nit to `j`-nit map.
    pub fn audit(&self) -> SBoxAudit {
        let rows = (0..self.rows)
            .map(|r| {
                let mut counts = vec![0u32; self.cols];
                for &v in self.row(r) {
                    counts[v as usize] += 1;
                }
                let missing: Vec<u32> = (0..self.cols as u32).filter(|&v| counts[v as usize] == 0).collect();
                let duplicated: Vec<u32> = (0..self.cols as u32).filter(|&v| counts[v as usize] > 1).collect();
                RowAudit {
                    row: r,
                    surjective: missing.is_empty(),
                    missing,
                    duplicated,
                }
            })
            .collect();
        SBoxAudit {
            affine: self.is_affine(),
            rows,
        }
    }

    /// The map as a table over block codes: `map[code(x)] = code(F(x))`.
    pub fn input_map(&self) -> Vec<u32> {
        let base = self.group.order();
        let domain = (self.rows * self.cols) as u64;
        (0..domain)
            .map(|x| {
                let (r, c) = self.locate_digits(&to_digits(x, base, self.block_len()));
                self.entry(r, c)
            })
            .collect()
    }

    /// `F(x) ⊖ F(0)` is a homomorphism iff it is additive along every
    /// generator direction (one unit residue at one nit position), checked for
    /// every `x`.
    fn is_affine(&self) -> bool {
        let g = &self.group;
        let base = g.order();
        let len = self.block_len();
        let map = self.input_map();
        let digits_j = |code: u32| to_digits(code as u64, base, self.j);
        let sub_j = |a: &[u32], b: &[u32]| -> Vec<u32> {
            a.iter().zip(b).map(|(&x, &y)| g.sub_index(x, y)).collect()
        };
        let add_j = |a: &[u32], b: &[u32]| -> Vec<u32> {
            a.iter().zip(b).map(|(&x, &y)| g.add_index(x, y)).collect()
        };
        let f0 = digits_j(map[0]);
        let lin: Vec<Vec<u32>> = map.iter().map(|&v| sub_j(&digits_j(v), &f0)).collect();

        // generator element of each cyclic factor, as an element index
        let factor_gens: Vec<u32> = (0..g.moduli().len())
            .map(|f| {
                let mut res = vec![0; g.moduli().len()];
                res[f] = 1;
                g.index_of(&crate::group::GroupElem::new(res)).expect("valid")
            })
            .collect();

        for pos in 0..len {
            for &gen in &factor_gens {
                let mut dir = vec![0u32; len];
                dir[pos] = gen;
                let dir_code = from_digits(dir.iter().copied(), base) as usize;
                let lin_dir = &lin[dir_code];
                for x in 0..map.len() {
                    let xd = to_digits(x as u64, base, len);
                    let shifted: Vec<u32> = xd.iter().zip(&dir).map(|(&a, &b)| g.add_index(a, b)).collect();
                    let sx = from_digits(shifted, base) as usize;
                    if lin[sx] != add_j(&lin[x], lin_dir) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Expands a box over `G` to one over `H` along an embedding. Cells whose
    /// row and column digits all lie in the image of `G` hold the embedded
    /// original entry; every other cell holds the smallest `j`-nit word over
    /// `H` that is not an embedded `G`-word.
    pub fn expand(&self, emb: &GroupEmbedding) -> Result<SBox> {
        if emb.source() != &self.group {
            return Err(Error::Embedding(format!(
                "embedding starts at {}, S-box is over {}",
                emb.source(),
                self.group
            )));
        }
        let h = emb.target();
        let hb = h.order();
        let gb = self.group.order();
        let rows = pow_checked(hb, self.i)? as usize;
        let cols = pow_checked(hb, self.j)? as usize;
        let filler = (0..cols as u64)
            .find(|&code| to_digits(code, hb, self.j).iter().any(|&d| emb.preimage(d).is_none()))
            .expect("|H| > |G| leaves a non-embedded word") as u32;
        let mut table = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let rd = to_digits(r as u64, hb, self.i);
            let g_row: Option<Vec<u32>> = rd.iter().map(|&d| emb.preimage(d)).collect();
            for c in 0..cols {
                let cd = to_digits(c as u64, hb, self.j);
                let g_col: Option<Vec<u32>> = cd.iter().map(|&d| emb.preimage(d)).collect();
                let v = match (&g_row, g_col) {
                    (Some(gr), Some(gc)) => {
                        let orig = self.entry(
                            from_digits(gr.iter().copied(), gb) as usize,
                            from_digits(gc, gb) as usize,
                        );
                        let mapped = to_digits(orig as u64, gb, self.j)
                            .into_iter()
                            .map(|d| emb.image(d));
                        from_digits(mapped, hb) as u32
                    }
                    _ => filler,
                };
                table.push(v);
            }
        }
        SBox::new(h.clone(), self.i, self.j, table)
    }
}

/// An injective group homomorphism `G -> H`, given by the image of each
/// element index of `G`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupEmbedding {
    source: GroupSpec,
    target: GroupSpec,
    images: Vec<u32>,
    preimages: Vec<Option<u32>>,
}

impl GroupEmbedding {
    pub fn new(source: GroupSpec, target: GroupSpec, images: Vec<u32>) -> Result<Self> {
        if target.order() <= source.order() {
            return Err(Error::Embedding(format!(
                "target {target} must be strictly larger than source {source}"
            )));
        }
        if images.len() as u64 != source.order() {
            return Err(Error::Embedding(format!(
                "need {} images, got {}",
                source.order(),
                images.len()
            )));
        }
        let mut preimages = vec![None; target.order() as usize];
        for (a, &img) in images.iter().enumerate() {
            if img as u64 >= target.order() {
                return Err(Error::Embedding(format!("image {img} outside {target}")));
            }
            if preimages[img as usize].replace(a as u32).is_some() {
                return Err(Error::Embedding(format!("image {img} is hit twice; not injective")));
            }
        }
        for a in 0..source.order() as u32 {
            for b in 0..source.order() as u32 {
                let lhs = images[source.add_index(a, b) as usize];
                let rhs = target.add_index(images[a as usize], images[b as usize]);
                if lhs != rhs {
                    return Err(Error::Embedding(format!(
                        "not a homomorphism: e({a}+{b}) = {lhs} but e({a})+e({b}) = {rhs}"
                    )));
                }
            }
        }
        Ok(GroupEmbedding {
            source,
            target,
            images,
            preimages,
        })
    }

    /// `Z_n -> Z_{n*m}`, `x -> m*x`.
    pub fn scaled_cyclic(n: u32, m: u32) -> Result<Self> {
        let source = GroupSpec::cyclic(n)?;
        let target = GroupSpec::cyclic(n * m)?;
        GroupEmbedding::new(source, target, (0..n).map(|x| x * m).collect())
    }

    pub fn source(&self) -> &GroupSpec {
        &self.source
    }

    pub fn target(&self) -> &GroupSpec {
        &self.target
    }

    pub fn image(&self, a: u32) -> u32 {
        self.images[a as usize]
    }

    pub fn preimage(&self, h: u32) -> Option<u32> {
        self.preimages[h as usize]
    }

    pub fn embed_word(&self, w: &Word) -> Result<Word> {
        if w.group() != &self.source {
            return Err(Error::Embedding(format!("word over {} not {}", w.group(), self.source)));
        }
        Word::new(self.target.clone(), w.nits().iter().map(|&d| self.image(d)).collect())
    }

    /// The `G`-word a target word comes from, if every nit is embedded.
    pub fn pull_back(&self, w: &Word) -> Option<Word> {
        if w.group() != &self.target {
            return None;
        }
        let nits: Option<Vec<u32>> = w.nits().iter().map(|&d| self.preimage(d)).collect();
        nits.map(|n| Word::from_raw(self.source.clone(), n))
    }
}

/// The round function `f(R, K)` built from `n` S-boxes and an expansion map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SBoxRoundSpec {
    boxes: Vec<SBox>,
    expansion: WireMap,
}

impl SBoxRoundSpec {
    pub fn new(boxes: Vec<SBox>, expansion: WireMap) -> Result<Self> {
        let first = boxes
            .first()
            .ok_or_else(|| Error::spec("/round_fn/boxes", "at least one S-box is required"))?;
        for (p, b) in boxes.iter().enumerate() {
            if b.group != first.group || b.i != first.i || b.j != first.j {
                return Err(Error::spec(
                    format!("/round_fn/boxes/{p}"),
                    "all S-boxes must share the group and the i, j dimensions",
                ));
            }
        }
        let spec = SBoxRoundSpec { boxes, expansion };
        if spec.expansion.out_len() != spec.subkey_len() {
            return Err(Error::spec(
                "/round_fn/expansion",
                format!(
                    "expansion produces {} nits, S-boxes consume (i+j)*n = {}",
                    spec.expansion.out_len(),
                    spec.subkey_len()
                ),
            ));
        }
        Ok(spec)
    }

    pub fn boxes(&self) -> &[SBox] {
        &self.boxes
    }

    pub fn expansion(&self) -> &WireMap {
        &self.expansion
    }

    pub fn i(&self) -> usize {
        self.boxes[0].i
    }

    pub fn j(&self) -> usize {
        self.boxes[0].j
    }

    pub fn group(&self) -> &GroupSpec {
        &self.boxes[0].group
    }

    pub fn n_boxes(&self) -> usize {
        self.boxes.len()
    }

    /// `(i + j) * n` nits.
    pub fn subkey_len(&self) -> usize {
        (self.i() + self.j()) * self.n_boxes()
    }

    /// Checks the `t = j * n` constraint and the expansion input width.
    pub fn validate(&self, group: &GroupSpec, t: usize) -> Result<()> {
        if self.group() != group {
            return Err(Error::spec(
                "/round_fn/boxes",
                format!("S-boxes are over {}, cipher is over {group}", self.group()),
            ));
        }
        if t != self.j() * self.n_boxes() {
            return Err(Error::spec(
                "/t",
                format!(
                    "half width t = {t} must equal j * n_boxes = {} * {}",
                    self.j(),
                    self.n_boxes()
                ),
            ));
        }
        if self.expansion.in_len() != t {
            return Err(Error::spec(
                "/round_fn/expansion",
                format!("expansion reads {} nits, half width is {t}", self.expansion.in_len()),
            ));
        }
        Ok(())
    }

    pub fn eval(&self, right: &Word, subkey: &Word) -> Result<Word> {
        Ok(self.eval_steps(right, subkey)?.1)
    }

    /// `f(R, K)` together with the per-box lookups that produced it.
    pub fn eval_steps(&self, right: &Word, subkey: &Word) -> Result<(Vec<SBoxStep>, Word)> {
        let mixed = self.expansion.apply(right)?.add(subkey)?;
        let width = self.i() + self.j();
        let mut steps = Vec::with_capacity(self.n_boxes());
        let mut out = Vec::with_capacity(self.j() * self.n_boxes());
        for (s, b) in self.boxes.iter().enumerate() {
            let block = mixed.slice(s * width, (s + 1) * width);
            let (row, col) = b.locate(&block)?;
            let entry = b.entry(row, col);
            let ow = b.entry_word(entry);
            out.extend_from_slice(ow.nits());
            steps.push(SBoxStep {
                input: block.to_string(),
                row,
                col,
                entry,
                output: ow.to_string(),
            });
        }
        Ok((steps, Word::from_raw(right.group().clone(), out)))
    }

    pub fn expand(&self, emb: &GroupEmbedding) -> Result<SBoxRoundSpec> {
        let boxes = self.boxes.iter().map(|b| b.expand(emb)).collect::<Result<Vec<_>>>()?;
        SBoxRoundSpec::new(boxes, self.expansion.clone())
    }
}

/// The same cipher over a larger group: identical wiring, expanded S-boxes.
pub fn expand_cipher(spec: &CipherSpec, emb: &GroupEmbedding) -> Result<CipherSpec> {
    let RoundFunction::SBox(rf) = spec.round_fn() else {
        return Err(Error::Embedding("only S-box ciphers can be expanded".into()));
    };
    if spec.group() != emb.source() {
        return Err(Error::Embedding(format!(
            "cipher is over {}, embedding starts at {}",
            spec.group(),
            emb.source()
        )));
    }
    CipherSpec::new(CipherParams {
        group: emb.target().clone(),
        t: spec.t(),
        rounds: spec.rounds(),
        initial_perm: spec.initial_perm().clone(),
        key_length: spec.key_length(),
        key_schedule: spec.key_schedule().to_vec(),
        round_fn: RoundFunction::SBox(rf.expand(emb)?),
        final_swap: spec.final_swap(),
    })
}
