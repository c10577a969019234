//! The eleven official South African languages and their family partition.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// ISO 639-3 code of one of the eleven official South African languages.
///
/// Variants are declared in lexicographic order of their codes, so the
/// derived `Ord` is the lexicographic code order used for tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LanguageCode {
    /// Afrikaans
    Afr,
    /// English
    Eng,
    /// isiNdebele
    Nbl,
    /// Sepedi
    Nso,
    /// Sesotho
    Sot,
    /// siSwati
    Ssw,
    /// Setswana
    Tsn,
    /// Xitsonga
    Tso,
    /// Tshivenda
    Ven,
    /// isiXhosa
    Xho,
    /// isiZulu
    Zul,
}

impl LanguageCode {
    pub const ALL: [LanguageCode; 11] = [
        LanguageCode::Afr,
        LanguageCode::Eng,
        LanguageCode::Nbl,
        LanguageCode::Nso,
        LanguageCode::Sot,
        LanguageCode::Ssw,
        LanguageCode::Tsn,
        LanguageCode::Tso,
        LanguageCode::Ven,
        LanguageCode::Xho,
        LanguageCode::Zul,
    ];

    pub fn code(self) -> &'static str {
        match self {
            LanguageCode::Afr => "afr",
            LanguageCode::Eng => "eng",
            LanguageCode::Nbl => "nbl",
            LanguageCode::Nso => "nso",
            LanguageCode::Sot => "sot",
            LanguageCode::Ssw => "ssw",
            LanguageCode::Tsn => "tsn",
            LanguageCode::Tso => "tso",
            LanguageCode::Ven => "ven",
            LanguageCode::Xho => "xho",
            LanguageCode::Zul => "zul",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LanguageCode::Afr => "Afrikaans",
            LanguageCode::Eng => "English",
            LanguageCode::Nbl => "isiNdebele",
            LanguageCode::Nso => "Sepedi",
            LanguageCode::Sot => "Sesotho",
            LanguageCode::Ssw => "siSwati",
            LanguageCode::Tsn => "Setswana",
            LanguageCode::Tso => "Xitsonga",
            LanguageCode::Ven => "Tshivenda",
            LanguageCode::Xho => "isiXhosa",
            LanguageCode::Zul => "isiZulu",
        }
    }

    /// Position in [`LanguageCode::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn family(self) -> LanguageFamily {
        family_of(self)
    }
}

impl fmt::Display for LanguageCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for LanguageCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LanguageCode::ALL
            .iter()
            .copied()
            .find(|l| l.code() == s)
            .ok_or_else(|| Error::UnknownLanguage(s.to_string()))
    }
}

/// Language family grouping of the official languages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LanguageFamily {
    Germanic,
    Nguni,
    SothoTswana,
    TswaRonga,
    Venda,
}

/// Identifier of the fixed language → family taxonomy, recorded in bundle manifests.
pub const FAMILY_MAP_VERSION: &str = "za11-v1";

impl LanguageFamily {
    pub const ALL: [LanguageFamily; 5] = [
        LanguageFamily::Germanic,
        LanguageFamily::Nguni,
        LanguageFamily::SothoTswana,
        LanguageFamily::TswaRonga,
        LanguageFamily::Venda,
    ];

    pub fn members(self) -> &'static [LanguageCode] {
        use LanguageCode::*;
        match self {
            LanguageFamily::Germanic => &[Afr, Eng],
            LanguageFamily::Nguni => &[Nbl, Ssw, Xho, Zul],
            LanguageFamily::SothoTswana => &[Nso, Sot, Tsn],
            LanguageFamily::TswaRonga => &[Tso],
            LanguageFamily::Venda => &[Ven],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LanguageFamily::Germanic => "Germanic",
            LanguageFamily::Nguni => "Nguni",
            LanguageFamily::SothoTswana => "SothoTswana",
            LanguageFamily::TswaRonga => "TswaRonga",
            LanguageFamily::Venda => "Venda",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for LanguageFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Family of a language. Total over [`LanguageCode`].
pub fn family_of(lang: LanguageCode) -> LanguageFamily {
    use LanguageCode::*;
    match lang {
        Afr | Eng => LanguageFamily::Germanic,
        Nbl | Xho | Zul | Ssw => LanguageFamily::Nguni,
        Nso | Sot | Tsn => LanguageFamily::SothoTswana,
        Tso => LanguageFamily::TswaRonga,
        Ven => LanguageFamily::Venda,
    }
}
