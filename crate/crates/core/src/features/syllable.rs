//! Heuristic syllable counting.
//!
//! English: contiguous vowel groups (y counts as a vowel), minus a trailing
//! silent 'e' unless it closes a consonant+"le" cluster ("table"). Spanish:
//! vowel-group nuclei where strong vowels (a, e, o, accented forms) and
//! accented weak vowels (í, ú) each anchor a syllable while unaccented weak
//! vowels (i, u, ü) glide into diphthongs. Both floor at 1 for words that
//! contain letters; tokens with no letters count 0.

use crate::corpus::Lang;

fn en_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

fn es_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'á' | 'é' | 'í' | 'ó' | 'ú' | 'ü')
}

/// Strong or accented-weak: anchors its own syllable nucleus.
fn es_nucleus(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'o' | 'á' | 'é' | 'ó' | 'í' | 'ú')
}

pub fn count_syllables(word: &str, lang: Lang) -> usize {
    let w: Vec<char> = word.to_lowercase().chars().collect();
    let n = match lang {
        Lang::En => english(&w),
        Lang::Es => spanish(&w),
    };
    if n == 0 && w.iter().any(|c| c.is_alphabetic()) {
        1
    } else {
        n
    }
}

fn english(w: &[char]) -> usize {
    let mut groups = 0;
    let mut in_group = false;
    for &c in w {
        if en_vowel(c) {
            if !in_group {
                groups += 1;
            }
            in_group = true;
        } else {
            in_group = false;
        }
    }
    let n = w.len();
    if groups >= 2 && n >= 2 && w[n - 1] == 'e' && !en_vowel(w[n - 2]) {
        // Keep the final syllable of consonant+"le" words (ta-ble, ap-ple).
        let cons_le = w[n - 2] == 'l' && n >= 3 && !en_vowel(w[n - 3]);
        if !cons_le {
            groups -= 1;
        }
    }
    groups
}

fn spanish(w: &[char]) -> usize {
    let mut total = 0;
    let mut i = 0;
    while i < w.len() {
        if es_vowel(w[i]) {
            let start = i;
            while i < w.len() && es_vowel(w[i]) {
                i += 1;
            }
            let nuclei = w[start..i].iter().filter(|&&c| es_nucleus(c)).count();
            total += nuclei.max(1); // weak-only runs ("iu") still carry one
        } else {
            i += 1;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn en(w: &str) -> usize {
        count_syllables(w, Lang::En)
    }

    fn es(w: &str) -> usize {
        count_syllables(w, Lang::Es)
    }

    #[test]
    fn english_vowel_groups() {
        assert_eq!(en("cat"), 1);
        assert_eq!(en("immigrants"), 3);
        assert_eq!(en("the"), 1);
        assert_eq!(en("stupid"), 2);
        assert_eq!(en("beautiful"), 3);
    }

    #[test]
    fn english_silent_e() {
        assert_eq!(en("cake"), 1);
        assert_eq!(en("whole"), 1);
        assert_eq!(en("table"), 2);
        assert_eq!(en("apple"), 2);
        assert_eq!(en("see"), 1);
    }

    #[test]
    fn non_alphabetic_floors() {
        assert_eq!(en("123"), 0);
        assert_eq!(en("!!"), 0);
        assert_eq!(en("hmm"), 1);
        assert_eq!(es("y"), 1);
        assert_eq!(en(""), 0);
    }

    #[test]
    fn spanish_diphthongs_and_hiatus() {
        assert_eq!(es("niñas"), 2);
        assert_eq!(es("corriendo"), 3); // co-rrien-do: ie glides
        assert_eq!(es("fuego"), 2);
        assert_eq!(es("poeta"), 3); // strong+strong breaks: po-e-ta
        assert_eq!(es("país"), 2); // accented í breaks the diphthong
        assert_eq!(es("ciudad"), 2); // weak+weak glides: ciu-dad
        assert_eq!(es("veían"), 3);
        assert_eq!(es("hoy"), 1);
    }

    #[test]
    fn uppercase_and_accents_fold() {
        assert_eq!(en("SCREAMING"), 2);
        assert_eq!(es("PAÍS"), 2);
    }
}
