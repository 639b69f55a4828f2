//! Writes a parity-check matrix in alist format and reads it back.
//!
//! cargo run --release --example alist_export -- [x|z] [path]

use qldpc_apm::code::{build, CodeSpec, Side};
use qldpc_apm::gf2::{read_alist, write_alist};

fn main() {
    let mut args = std::env::args().skip(1);
    let side = match args.next().as_deref() {
        Some("z") => Side::Z,
        _ => Side::X,
    };
    let pair = build(&CodeSpec::reference());
    let h = pair.active(side);
    let text = write_alist(h);
    assert_eq!(&read_alist(&text).expect("alist parses"), h);
    match args.next() {
        Some(path) => std::fs::write(&path, &text).expect("write alist"),
        None => print!("{}", text.lines().take(2).map(|l| format!("{l}\n")).collect::<String>()),
    }
    println!("H_{side}: {} x {}, round trip ok", h.rows(), h.cols());
}
