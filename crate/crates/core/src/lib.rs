//! Tight polytopes from string Coxeter groups: coset enumeration, string
//! C-group checks, face posets and the tight families built from them.

pub mod atlas;
pub mod classifier;
pub mod families;
pub mod group;
pub mod par;
pub mod perm;
pub mod poset;
pub mod sggi;
pub mod todd_coxeter;
pub mod words;
