//! Criterion benchmarks for the matching games, the multi-game loop and the swap baseline. Run with `cargo bench -p hetmatch-bench`.
