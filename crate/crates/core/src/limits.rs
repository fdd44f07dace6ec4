/// Size limits for the exhaustive parts of the crate.
///
/// `menu_audit` bounds operations that walk all 2^n menus of a domain
/// (tabulation, single-menu audits). `pair_audit` bounds the 4^n
/// path-independence pair audit. `enumeration` bounds brute-force stable-set
/// enumeration by contract count, and `decompose` bounds the sequential
/// decomposition search by domain size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub menu_audit: usize,
    pub pair_audit: usize,
    pub enumeration: usize,
    pub decompose: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            menu_audit: 16,
            pair_audit: 12,
            enumeration: 20,
            decompose: 6,
        }
    }
}
