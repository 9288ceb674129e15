use once_cell::sync::Lazy;
use publicsuffix::{List, Psl};

static BUNDLED_PSL: &str = include_str!("../../data/public_suffix_list.dat");

static BUNDLED: Lazy<SuffixList> =
    Lazy::new(|| SuffixList::from_text(BUNDLED_PSL).expect("bundled suffix list parses"));

/// Public-suffix rules used to find the effective TLD of a host.
///
/// Hosts whose last label is not covered by any rule fall back to that last label.
pub struct SuffixList {
    list: List,
}

impl SuffixList {
    pub fn from_text(text: &str) -> Result<Self, publicsuffix::Error> {
        Ok(Self {
            list: text.parse()?,
        })
    }

    /// ICANN section of the public-suffix list shipped in `data/`.
    pub fn bundled() -> &'static SuffixList {
        &BUNDLED
    }

    pub fn effective_tld(&self, host: &str) -> String {
        let host = host.trim_end_matches('.').to_ascii_lowercase();
        match self.list.suffix(host.as_bytes()) {
            Some(s) if s.is_known() => String::from_utf8_lossy(s.as_bytes()).into_owned(),
            _ => host.rsplit('.').next().unwrap_or("").to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn effective_tlds() {
        let psl = SuffixList::bundled();
        assert_eq!(psl.effective_tld("cs.odu.edu"), "edu");
        assert_eq!(psl.effective_tld("www.bbc.co.uk"), "co.uk");
        assert_eq!(psl.effective_tld("timesonline.co.uk"), "co.uk");
        assert_eq!(psl.effective_tld("example.com.au"), "com.au");
        assert_eq!(psl.effective_tld("radiotunis.com"), "com");
        // unknown TLD falls back to the last label
        assert_eq!(psl.effective_tld("host.notarealtld"), "notarealtld");
    }
}
