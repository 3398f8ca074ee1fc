//! Holds the `acceptance` test target, kept apart from the library so that a
//! failing criterion does not stop the library's own test binaries.
