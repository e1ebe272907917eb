//! Holds the `acceptance` test target (`cargo test -p bzl-validation --test
//! acceptance`). It is a separate package so that it runs after every other
//! test target of a workspace run.
