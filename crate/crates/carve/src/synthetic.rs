//! Generator for a small corpus of five byte-distinguishable classes, used
//! for smoke tests and demos.
//!
//! | label    | content |
//! |----------|---------|
//! | `csv`    | comma-separated ASCII records |
//! | `dbase3` | fixed-width records padded with spaces |
//! | `rand`   | uniform random bytes |
//! | `ramp`   | sawtooth byte ramp |
//! | `xml`    | angle-bracket tagged ASCII |

use std::io;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CLASSES: [&str; 5] = ["csv", "dbase3", "rand", "ramp", "xml"];

const ALNUM: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

/// Generates `len` bytes of class `class`.
pub fn generate(class: &str, len: usize, rng: &mut impl Rng) -> Vec<u8> {
    let mut out = Vec::with_capacity(len + 64);
    match class {
        "csv" => {
            while out.len() < len {
                let fields = rng.random_range(3..8);
                for f in 0..fields {
                    if f > 0 {
                        out.push(b',');
                    }
                    let quoted = rng.random_bool(0.3);
                    if quoted {
                        out.push(b'"');
                    }
                    for _ in 0..rng.random_range(1..6) {
                        out.push(if rng.random_bool(0.6) {
                            b'0' + rng.random_range(0..10u8)
                        } else {
                            ALNUM[rng.random_range(0..ALNUM.len())]
                        });
                    }
                    if quoted {
                        out.push(b'"');
                    }
                }
                out.push(b'\n');
            }
        }
        "dbase3" => {
            while out.len() < len {
                out.push(b' ');
                for width in [12usize, 20, 8, 24] {
                    let used = rng.random_range(1..width / 2);
                    for _ in 0..used {
                        out.push(ALNUM[rng.random_range(0..ALNUM.len())]);
                    }
                    out.extend(std::iter::repeat_n(b' ', width - used));
                }
            }
        }
        "rand" => {
            out.resize(len, 0);
            rng.fill(&mut out[..]);
        }
        "ramp" => {
            let start: u8 = rng.random();
            out.extend((0..len).map(|i| start.wrapping_add(i as u8)));
        }
        "xml" => {
            const TAGS: [&str; 6] = ["item", "name", "value", "entry", "id", "node"];
            while out.len() < len {
                let tag = TAGS[rng.random_range(0..TAGS.len())];
                out.extend_from_slice(format!("<{tag} k=\"{}\">", rng.random_range(0..100)).as_bytes());
                for _ in 0..rng.random_range(0..8) {
                    out.push(ALNUM[rng.random_range(0..ALNUM.len())]);
                }
                out.extend_from_slice(format!("</{tag}>").as_bytes());
                if rng.random_bool(0.3) {
                    out.push(b'\n');
                }
            }
        }
        other => panic!("unknown synthetic class {other}"),
    }
    out.truncate(len);
    out
}

/// Writes `files_per_class` files per class under `root/<class>/`, named
/// `<class>_NN.<class>` so both label rules give the same labels. File
/// lengths vary between 7 and 9 KiB.
pub fn write_corpus(root: &Path, files_per_class: usize, seed: u64) -> io::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for class in CLASSES {
        let dir = root.join(class);
        std::fs::create_dir_all(&dir)?;
        for i in 0..files_per_class {
            let len = rng.random_range(7 * 1024..9 * 1024);
            let data = generate(class, len, &mut rng);
            std::fs::write(dir.join(format!("{class}_{i:02}.{class}")), data)?;
        }
    }
    Ok(())
}
