//! Styled Unicode alphabets used by `replace_fun_fonts`. Every styled
//! codepoint produced here is reversible through the built-in tables.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Font {
    Bold,
    Italic,
    BoldItalic,
    Script,
    BoldScript,
    Fraktur,
    DoubleStruck,
    BoldFraktur,
    Sans,
    SansBold,
    SansItalic,
    SansBoldItalic,
    Monospace,
    Fullwidth,
    Circled,
}

impl Font {
    pub const ALL: [Font; 15] = [
        Font::Bold,
        Font::Italic,
        Font::BoldItalic,
        Font::Script,
        Font::BoldScript,
        Font::Fraktur,
        Font::DoubleStruck,
        Font::BoldFraktur,
        Font::Sans,
        Font::SansBold,
        Font::SansItalic,
        Font::SansBoldItalic,
        Font::Monospace,
        Font::Fullwidth,
        Font::Circled,
    ];

    /// Codepoint of capital A in the Mathematical Alphanumeric block.
    fn math_base(self) -> Option<u32> {
        Some(match self {
            Font::Bold => 0x1D400,
            Font::Italic => 0x1D434,
            Font::BoldItalic => 0x1D468,
            Font::Script => 0x1D49C,
            Font::BoldScript => 0x1D4D0,
            Font::Fraktur => 0x1D504,
            Font::DoubleStruck => 0x1D538,
            Font::BoldFraktur => 0x1D56C,
            Font::Sans => 0x1D5A0,
            Font::SansBold => 0x1D5D4,
            Font::SansItalic => 0x1D608,
            Font::SansBoldItalic => 0x1D63C,
            Font::Monospace => 0x1D670,
            Font::Fullwidth | Font::Circled => return None,
        })
    }

    fn digit_base(self) -> Option<u32> {
        match self {
            Font::Bold => Some(0x1D7CE),
            Font::DoubleStruck => Some(0x1D7D8),
            Font::Sans => Some(0x1D7E2),
            Font::SansBold => Some(0x1D7EC),
            Font::Monospace => Some(0x1D7F6),
            Font::Fullwidth => Some(0xFF10),
            _ => None,
        }
    }

    // Reserved holes in the math block; the glyphs live in Letterlike Symbols.
    fn hole(self, c: char) -> Option<u32> {
        Some(match (self, c) {
            (Font::Italic, 'h') => 0x210E,
            (Font::Script, 'B') => 0x212C,
            (Font::Script, 'E') => 0x2130,
            (Font::Script, 'F') => 0x2131,
            (Font::Script, 'H') => 0x210B,
            (Font::Script, 'I') => 0x2110,
            (Font::Script, 'L') => 0x2112,
            (Font::Script, 'M') => 0x2133,
            (Font::Script, 'R') => 0x211B,
            (Font::Script, 'e') => 0x212F,
            (Font::Script, 'g') => 0x210A,
            (Font::Script, 'o') => 0x2134,
            (Font::Fraktur, 'C') => 0x212D,
            (Font::Fraktur, 'H') => 0x210C,
            (Font::Fraktur, 'I') => 0x2111,
            (Font::Fraktur, 'R') => 0x211C,
            (Font::Fraktur, 'Z') => 0x2128,
            (Font::DoubleStruck, 'C') => 0x2102,
            (Font::DoubleStruck, 'H') => 0x210D,
            (Font::DoubleStruck, 'N') => 0x2115,
            (Font::DoubleStruck, 'P') => 0x2119,
            (Font::DoubleStruck, 'Q') => 0x211A,
            (Font::DoubleStruck, 'R') => 0x211D,
            (Font::DoubleStruck, 'Z') => 0x2124,
            _ => return None,
        })
    }

    /// Styled form of an ASCII letter or digit, if this font has one.
    pub fn style(self, c: char) -> Option<char> {
        let cp = if c.is_ascii_uppercase() || c.is_ascii_lowercase() {
            let idx = if c.is_ascii_uppercase() { c as u32 - 'A' as u32 } else { 26 + c as u32 - 'a' as u32 };
            match self {
                Font::Fullwidth => c as u32 + 0xFEE0,
                Font::Circled if c.is_ascii_uppercase() => 0x24B6 + c as u32 - 'A' as u32,
                Font::Circled => 0x24D0 + c as u32 - 'a' as u32,
                _ => self.hole(c).unwrap_or(self.math_base()? + idx),
            }
        } else if c.is_ascii_digit() {
            let d = c as u32 - '0' as u32;
            match self {
                Font::Circled if d == 0 => 0x24EA,
                Font::Circled => 0x2460 + d - 1,
                _ => self.digit_base()? + d,
            }
        } else {
            return None;
        };
        char::from_u32(cp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mappings::ConfusableTable;

    #[test]
    fn bold_t() {
        assert_eq!(Font::Bold.style('T'), Some('𝐓'));
        assert_eq!(Font::Italic.style('h'), Some('ℎ'));
        assert_eq!(Font::Circled.style('0'), Some('⓪'));
        assert_eq!(Font::Script.style('7'), None);
        assert_eq!(Font::Bold.style('!'), None);
    }

    #[test]
    fn every_styled_codepoint_reverses_through_builtin_tables() {
        let table = ConfusableTable::builtin();
        for font in Font::ALL {
            for c in ('A'..='Z').chain('a'..='z').chain('0'..='9') {
                let Some(s) = font.style(c) else { continue };
                assert_ne!(s, c);
                let got = table.lookup(&[s], 0).map(|(_, r)| r.to_string());
                assert_eq!(got.as_deref(), Some(c.to_string().as_str()), "{font:?} {c} -> U+{:04X}", s as u32);
            }
        }
    }
}
