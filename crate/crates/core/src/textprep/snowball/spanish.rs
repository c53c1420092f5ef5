//! The Spanish Snowball stemming algorithm.
//!
//! Implemented from the published algorithm definition. All indices are char
//! positions (the buffer holds accented letters). A suffix "in RV/R1/R2"
//! means its start index is ≥ the region mark.

fn v(c: char) -> bool {
    matches!(
        c,
        'a' | 'e' | 'i' | 'o' | 'u' | 'á' | 'é' | 'í' | 'ó' | 'ú' | 'ü'
    )
}

fn ends(w: &[char], end: usize, pat: &str) -> bool {
    let m = pat.chars().count();
    end >= m && w[end - m..end].iter().copied().eq(pat.chars())
}

/// First (= longest, tables are length-sorted) suffix of `w[..end]` found in
/// `table`, as `(index, start)`.
fn longest<A>(w: &[char], end: usize, table: &[(&str, A)]) -> Option<(usize, usize)> {
    table
        .iter()
        .position(|(pat, _)| ends(w, end, pat))
        .map(|i| (i, end - table[i].0.chars().count()))
}

/// Like [`longest`], but only considers suffixes lying entirely inside the
/// region starting at `limit` (Snowball's `setlimit` in the verb steps).
fn longest_within<A>(w: &[char], limit: usize, table: &[(&str, A)]) -> Option<(usize, usize)> {
    let end = w.len();
    table
        .iter()
        .position(|(pat, _)| {
            let m = pat.chars().count();
            end >= m && end - m >= limit && ends(w, end, pat)
        })
        .map(|i| (i, end - table[i].0.chars().count()))
}

/// Attached pronouns (step 0), longest-first.
const PRONOUNS: &[&str] = &[
    "selas", "selos", "sela", "selo", "las", "les", "los", "nos", "la", "le", "lo", "me", "se",
];

/// Gerund/infinitive markers that license pronoun removal. The action is the
/// unaccented replacement; empty means only the pronoun is dropped.
const MARKERS: &[(&str, &str)] = &[
    ("iéndo", "iendo"),
    ("yendo", ""),
    ("iendo", ""),
    ("ándo", "ando"),
    ("ando", ""),
    ("ár", "ar"),
    ("ér", "er"),
    ("ír", "ir"),
    ("ar", ""),
    ("er", ""),
    ("ir", ""),
];

// Step 1 actions. 1: delete (R2). 2: delete (R2), then drop a preceding
// "ic" (R2). 3: -> "log". 4: -> "u". 5: -> "ente". 6: "amente" (R1 + extras).
// 7: "mente". 8: "idad". 9: "iva"/"ivo" family.
const STEP1: &[(&str, u8)] = &[
    ("amientos", 1),
    ("imientos", 1),
    ("amiento", 1),
    ("imiento", 1),
    ("aciones", 2),
    ("uciones", 4),
    ("logías", 3),
    ("idades", 8),
    ("encias", 5),
    ("ancias", 2),
    ("adoras", 2),
    ("adores", 2),
    ("amente", 6),
    ("logía", 3),
    ("encia", 5),
    ("ancia", 2),
    ("adora", 2),
    ("ación", 2),
    ("ución", 4),
    ("mente", 7),
    ("antes", 2),
    ("anzas", 1),
    ("icas", 1),
    ("icos", 1),
    ("osas", 1),
    ("osos", 1),
    ("istas", 1),
    ("ables", 1),
    ("ibles", 1),
    ("ismos", 1),
    ("ivas", 9),
    ("ivos", 9),
    ("idad", 8),
    ("able", 1),
    ("ible", 1),
    ("ante", 2),
    ("anza", 1),
    ("ador", 2),
    ("ismo", 1),
    ("ista", 1),
    ("osa", 1),
    ("oso", 1),
    ("ica", 1),
    ("ico", 1),
    ("iva", 9),
    ("ivo", 9),
];

/// Step 2a: verb suffixes beginning with y (deleted when preceded by u).
const STEP2A: &[(&str, u8)] = &[
    ("yeron", 0),
    ("yendo", 0),
    ("yamos", 0),
    ("yais", 0),
    ("yan", 0),
    ("yen", 0),
    ("yas", 0),
    ("yes", 0),
    ("ya", 0),
    ("ye", 0),
    ("yo", 0),
    ("yó", 0),
];

// Step 2b actions: 1 = delete and drop a "u" from a preceding "gu";
// 2 = plain delete.
const STEP2B: &[(&str, u8)] = &[
    ("aríamos", 2),
    ("eríamos", 2),
    ("iríamos", 2),
    ("iéramos", 2),
    ("iésemos", 2),
    ("aríais", 2),
    ("eríais", 2),
    ("iríais", 2),
    ("aremos", 2),
    ("eremos", 2),
    ("iremos", 2),
    ("ásemos", 2),
    ("ábamos", 2),
    ("áramos", 2),
    ("ierais", 2),
    ("ieseis", 2),
    ("asteis", 2),
    ("isteis", 2),
    ("íamos", 2),
    ("arían", 2),
    ("erían", 2),
    ("irían", 2),
    ("aréis", 2),
    ("eréis", 2),
    ("iréis", 2),
    ("arías", 2),
    ("erías", 2),
    ("irías", 2),
    ("abais", 2),
    ("arais", 2),
    ("aseis", 2),
    ("íais", 2),
    ("aría", 2),
    ("ería", 2),
    ("iría", 2),
    ("arán", 2),
    ("erán", 2),
    ("irán", 2),
    ("arás", 2),
    ("erás", 2),
    ("irás", 2),
    ("ieran", 2),
    ("iesen", 2),
    ("ieron", 2),
    ("iendo", 2),
    ("ieras", 2),
    ("ieses", 2),
    ("aban", 2),
    ("aran", 2),
    ("asen", 2),
    ("aron", 2),
    ("ando", 2),
    ("abas", 2),
    ("adas", 2),
    ("idas", 2),
    ("aras", 2),
    ("ases", 2),
    ("ados", 2),
    ("idos", 2),
    ("amos", 2),
    ("imos", 2),
    ("emos", 1),
    ("ían", 2),
    ("ado", 2),
    ("ido", 2),
    ("ías", 2),
    ("áis", 2),
    ("éis", 1),
    ("ía", 2),
    ("ad", 2),
    ("ed", 2),
    ("id", 2),
    ("ase", 2),
    ("iese", 2),
    ("aste", 2),
    ("iste", 2),
    ("an", 2),
    ("en", 1),
    ("es", 1),
    ("ara", 2),
    ("iera", 2),
    ("aba", 2),
    ("ada", 2),
    ("ida", 2),
    ("ará", 2),
    ("erá", 2),
    ("irá", 2),
    ("aré", 2),
    ("eré", 2),
    ("iré", 2),
    ("ar", 2),
    ("er", 2),
    ("ir", 2),
    ("as", 2),
    ("ís", 2),
    ("ió", 2),
];

// Step 3 actions: 1 = delete in RV; 2 = delete in RV, then drop the u of a
// preceding "gu" when that u is in RV.
const STEP3: &[(&str, u8)] = &[
    ("os", 1),
    ("a", 1),
    ("o", 1),
    ("á", 1),
    ("í", 1),
    ("ó", 1),
    ("e", 2),
    ("é", 2),
];

struct Regions {
    pv: usize,
    p1: usize,
    p2: usize,
}

fn region_after(w: &[char], start: usize) -> usize {
    let n = w.len();
    let mut i = start;
    while i < n && !v(w[i]) {
        i += 1;
    }
    if i == n {
        return n;
    }
    i += 1;
    while i < n && v(w[i]) {
        i += 1;
    }
    if i == n {
        return n;
    }
    i + 1
}

fn mark_regions(w: &[char]) -> Regions {
    let n = w.len();
    let mut pv = n;
    if n >= 2 {
        if !v(w[0]) {
            if !v(w[1]) {
                // Two consonants: after the next vowel.
                if let Some(i) = (2..n).find(|&i| v(w[i])) {
                    pv = i + 1;
                }
            } else if n >= 3 {
                // Consonant-vowel: after the third letter.
                pv = 3;
            }
        } else if !v(w[1]) {
            // Vowel-consonant: after the next vowel.
            if let Some(i) = (2..n).find(|&i| v(w[i])) {
                pv = i + 1;
            }
        } else {
            // Two vowels: after the next consonant.
            if let Some(i) = (2..n).find(|&i| !v(w[i])) {
                pv = i + 1;
            }
        }
    }
    let p1 = region_after(w, 0);
    let p2 = region_after(w, p1);
    Regions { pv, p1, p2 }
}

/// Stems one lowercase Spanish word.
pub fn stem(word: &str) -> String {
    let mut w: Vec<char> = word.chars().collect();
    let r = mark_regions(&w);

    attached_pronoun(&mut w, &r);
    if !standard_suffix(&mut w, &r) && !y_verb_suffix(&mut w, &r) {
        verb_suffix(&mut w, &r);
    }
    residual_suffix(&mut w, &r);

    // Postlude: strip acute accents (ü is a real letter and stays).
    for c in &mut w {
        *c = match *c {
            'á' => 'a',
            'é' => 'e',
            'í' => 'i',
            'ó' => 'o',
            'ú' => 'u',
            other => other,
        };
    }
    w.into_iter().collect()
}

fn attached_pronoun(w: &mut Vec<char>, r: &Regions) {
    let n = w.len();
    let Some(pron) = PRONOUNS.iter().find(|p| ends(w, n, p)) else {
        return;
    };
    let pron_start = n - pron.chars().count();
    let Some((mi, marker_start)) = longest(w, pron_start, MARKERS) else {
        return;
    };
    if marker_start < r.pv {
        return;
    }
    let (marker, replacement) = MARKERS[mi];
    if replacement.is_empty() {
        if marker == "yendo" && !(marker_start >= 1 && w[marker_start - 1] == 'u') {
            return;
        }
        w.truncate(pron_start);
    } else {
        w.truncate(marker_start);
        w.extend(replacement.chars());
    }
}

/// Returns true if it removed or rewrote a suffix.
fn standard_suffix(w: &mut Vec<char>, r: &Regions) -> bool {
    let Some((i, start)) = longest(w, w.len(), STEP1) else {
        return false;
    };
    let action = STEP1[i].1;
    let in_r2 = start >= r.p2;
    match action {
        1 if in_r2 => w.truncate(start),
        2 if in_r2 => {
            w.truncate(start);
            try_drop(w, "ic", r.p2);
        }
        3 if in_r2 => {
            w.truncate(start);
            w.extend("log".chars());
        }
        4 if in_r2 => {
            w.truncate(start);
            w.push('u');
        }
        5 if in_r2 => {
            w.truncate(start);
            w.extend("ente".chars());
        }
        6 if start >= r.p1 => {
            w.truncate(start);
            if ends(w, w.len(), "iv") && w.len() - 2 >= r.p2 {
                w.truncate(w.len() - 2);
                try_drop(w, "at", r.p2);
            } else {
                for pat in ["os", "ic", "ad"] {
                    if try_drop(w, pat, r.p2) {
                        break;
                    }
                }
            }
        }
        7 if in_r2 => {
            w.truncate(start);
            for pat in ["ante", "able", "ible"] {
                if try_drop(w, pat, r.p2) {
                    break;
                }
            }
        }
        8 if in_r2 => {
            w.truncate(start);
            for pat in ["abil", "ic", "iv"] {
                if try_drop(w, pat, r.p2) {
                    break;
                }
            }
        }
        9 if in_r2 => {
            w.truncate(start);
            try_drop(w, "at", r.p2);
        }
        _ => return false,
    }
    true
}

/// Drops a trailing `pat` when it starts at or after `limit`.
fn try_drop(w: &mut Vec<char>, pat: &str, limit: usize) -> bool {
    let m = pat.chars().count();
    if ends(w, w.len(), pat) && w.len() - m >= limit {
        w.truncate(w.len() - m);
        true
    } else {
        false
    }
}

fn y_verb_suffix(w: &mut Vec<char>, r: &Regions) -> bool {
    let Some((_, start)) = longest_within(w, r.pv, STEP2A) else {
        return false;
    };
    // The preceding u need not be inside RV.
    if start >= 1 && w[start - 1] == 'u' {
        w.truncate(start);
        return true;
    }
    false
}

fn verb_suffix(w: &mut Vec<char>, r: &Regions) {
    let Some((i, start)) = longest_within(w, r.pv, STEP2B) else {
        return;
    };
    w.truncate(start);
    if STEP2B[i].1 == 1 && ends(w, w.len(), "gu") {
        // The u goes regardless of RV here.
        w.truncate(w.len() - 1);
    }
}

fn residual_suffix(w: &mut Vec<char>, r: &Regions) {
    let Some((i, start)) = longest(w, w.len(), STEP3) else {
        return;
    };
    if start < r.pv {
        return;
    }
    let action = STEP3[i].1;
    w.truncate(start);
    if action == 2 && ends(w, w.len(), "gu") && w.len() - 1 >= r.pv {
        w.truncate(w.len() - 1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_checked_pairs() {
        for (word, want) in [
            ("niñas", "niñ"),
            ("corriendo", "corr"),
            ("que", "que"),
            ("mujeres", "mujer"),
            ("estúpida", "estup"),
            ("cantarlo", "cant"),
            ("dándosela", "dandosel"),
            ("haciéndola", "hac"),
            ("lógica", "logic"),
            ("felizmente", "feliz"),
            ("enormemente", "enorm"),
            ("nacionalidades", "nacional"),
            ("comunicación", "comun"),
            ("llegue", "lleg"),
            ("pague", "pag"),
            ("averigüe", "averigü"),
            ("construyeron", "constru"),
            ("atacando", "atac"),
            ("inmigrantes", "inmigr"),
        ] {
            assert_eq!(stem(word), want, "stem({word:?})");
        }
    }
}
