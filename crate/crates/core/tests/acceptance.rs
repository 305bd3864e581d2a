//! Prints one line per criterion and exits non-zero if any fails. Run a
//! subset with `cargo test --test acceptance -- 3 13`.

fn main() {
    let only: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let results = cannon::acceptance::run(&only, |r| println!("{r}"));
    let failed: Vec<usize> = results
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.number)
        .collect();
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}
