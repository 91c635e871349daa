//! Acceptance suite for `coallab`. The criteria live in `tests/acceptance.rs`
//! and run with `cargo test -p coallab-validation --test acceptance`.
