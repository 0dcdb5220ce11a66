use std::collections::BTreeMap;
use std::fmt::Write as _;

use roxmltree::{Document, Node};

use super::{AnnotationFile, Contour, NonNodule, ReaderNodule};
use crate::characteristic::Characteristic;
use crate::error::{Error, Result};

/// Element order inside `<characteristics>` in LIDC files.
const CHARACTERISTIC_ORDER: [&str; 9] = [
    "subtlety",
    "internalStructure",
    "calcification",
    "sphericity",
    "margin",
    "lobulation",
    "spiculation",
    "texture",
    "malignancy",
];

/// Parses one LIDC `LidcReadMessage` document.
///
/// Nodules with a non-empty `<characteristics>` block become
/// [`AnnotationFile::nodules`]; the rest are kept in `small_marks`.
pub fn parse_annotation_file(xml: &[u8]) -> Result<AnnotationFile> {
    let text = std::str::from_utf8(xml).map_err(|e| Error::Xml {
        offset: e.valid_up_to(),
        message: "invalid UTF-8".into(),
    })?;
    let doc = Document::parse(text).map_err(|e| Error::Xml {
        offset: byte_offset(text, e.pos().row, e.pos().col),
        message: e.to_string(),
    })?;

    let root = doc.root_element();
    let mut file = AnnotationFile::default();
    if let Some(header) = child(root, "ResponseHeader") {
        file.study_uid = child_text(header, "StudyInstanceUID");
        file.series_uid = child_text(header, "SeriesInstanceUid");
    }

    for (k, session) in children(root, "readingSession").enumerate() {
        let reader_id = child_text(session, "servicingRadiologistID")
            .unwrap_or_else(|| format!("session-{}", k + 1));
        for node in children(session, "unblindedReadNodule") {
            let nodule = parse_nodule(node, &reader_id)?;
            if nodule.characteristics.is_empty() {
                file.small_marks.push(nodule);
            } else {
                file.nodules.push(nodule);
            }
        }
        for node in children(session, "nonNodule") {
            file.non_nodules.push(parse_non_nodule(node, &reader_id)?);
        }
    }
    Ok(file)
}

fn parse_nodule(node: Node<'_, '_>, reader_id: &str) -> Result<ReaderNodule> {
    let nodule_id = child_text(node, "noduleID").unwrap_or_default();
    let label = format!("{reader_id}/{nodule_id}");
    let mut characteristics = BTreeMap::new();
    if let Some(block) = child(node, "characteristics") {
        for el in block.children().filter(Node::is_element) {
            let name = el.tag_name().name();
            let raw = el.text().unwrap_or("").trim();
            if raw.is_empty() {
                continue;
            }
            let value: i64 = raw.parse().map_err(|_| {
                Error::invalid(format!("{label}: {name} is not an integer ({raw:?})"))
            })?;
            if let Ok(c) = name.parse::<Characteristic>() {
                if !c.contains(value) {
                    return Err(Error::OutOfRange {
                        nodule: label,
                        field: name.into(),
                        value,
                    });
                }
            }
            characteristics.insert(name.to_string(), value);
        }
    }

    let mut contours = Vec::new();
    for roi in children(node, "roi") {
        let sop_uid = child_text(roi, "imageSOP_UID")
            .ok_or_else(|| Error::invalid(format!("{label}: roi without imageSOP_UID")))?;
        let z_position = parse_number(roi, "imageZposition", &label)?;
        let inclusion = child_text(roi, "inclusion")
            .map(|t| !t.eq_ignore_ascii_case("false"))
            .unwrap_or(true);
        let mut points = Vec::new();
        for edge in children(roi, "edgeMap") {
            points.push(parse_point(edge, &label)?);
        }
        contours.push(Contour {
            sop_uid,
            z_position,
            inclusion,
            points,
        });
    }
    if contours.is_empty() || contours.iter().all(|c| c.points.is_empty()) {
        return Err(Error::Geometry {
            nodule: label,
            message: "no contour points".into(),
        });
    }

    Ok(ReaderNodule {
        reader_id: reader_id.to_string(),
        nodule_id,
        contours,
        characteristics,
    })
}

fn parse_non_nodule(node: Node<'_, '_>, reader_id: &str) -> Result<NonNodule> {
    let id = child_text(node, "nonNoduleID").unwrap_or_default();
    let label = format!("{reader_id}/{id}");
    let sop_uid = child_text(node, "imageSOP_UID").unwrap_or_default();
    let z_position = parse_number(node, "imageZposition", &label)?;
    let point = match child(node, "locus") {
        Some(locus) => parse_point(locus, &label)?,
        None => (0, 0),
    };
    Ok(NonNodule {
        reader_id: reader_id.to_string(),
        id,
        sop_uid,
        z_position,
        point,
    })
}

fn parse_point(node: Node<'_, '_>, label: &str) -> Result<(i32, i32)> {
    let coord = |name: &str| -> Result<i32> {
        let raw = child_text(node, name)
            .ok_or_else(|| Error::invalid(format!("{label}: missing {name}")))?;
        raw.parse()
            .map_err(|_| Error::invalid(format!("{label}: bad {name} {raw:?}")))
    };
    Ok((coord("xCoord")?, coord("yCoord")?))
}

fn parse_number(node: Node<'_, '_>, name: &str, label: &str) -> Result<f64> {
    let raw = child_text(node, name)
        .ok_or_else(|| Error::invalid(format!("{label}: missing {name}")))?;
    raw.parse()
        .map_err(|_| Error::invalid(format!("{label}: bad {name} {raw:?}")))
}

fn child<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Option<Node<'a, 'i>> {
    node.children()
        .find(|n| n.is_element() && n.tag_name().name() == name)
}

fn children<'a, 'i: 'a>(node: Node<'a, 'i>, name: &'a str) -> impl Iterator<Item = Node<'a, 'i>> + 'a {
    node.children()
        .filter(move |n| n.is_element() && n.tag_name().name() == name)
}

fn child_text(node: Node<'_, '_>, name: &str) -> Option<String> {
    child(node, name)
        .and_then(|n| n.text())
        .map(|t| t.trim().to_string())
        .filter(|t| !t.is_empty())
}

/// Converts roxmltree's 1-based (row, char column) into a byte offset.
fn byte_offset(text: &str, row: u32, col: u32) -> usize {
    let mut offset = 0;
    for (i, line) in text.split_inclusive('\n').enumerate() {
        if i + 1 == row as usize {
            let chars = (col as usize).saturating_sub(1);
            return offset
                + line
                    .char_indices()
                    .nth(chars)
                    .map(|(b, _)| b)
                    .unwrap_or(line.len());
        }
        offset += line.len();
    }
    text.len()
}

/// Serializes the retained fields back to LIDC XML.
///
/// Output is canonical: one session per reader in order of first appearance,
/// characterized nodules first, then small marks, then non-nodules.
pub fn write_annotation_file(file: &AnnotationFile) -> String {
    let mut readers: Vec<&str> = Vec::new();
    let all_readers = file
        .nodules
        .iter()
        .chain(&file.small_marks)
        .map(|n| n.reader_id.as_str())
        .chain(file.non_nodules.iter().map(|n| n.reader_id.as_str()));
    for r in all_readers {
        if !readers.contains(&r) {
            readers.push(r);
        }
    }

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<LidcReadMessage xmlns=\"http://www.nih.gov\">\n");
    out.push_str("  <ResponseHeader>\n");
    if let Some(uid) = &file.study_uid {
        tag(&mut out, 4, "StudyInstanceUID", uid);
    }
    if let Some(uid) = &file.series_uid {
        tag(&mut out, 4, "SeriesInstanceUid", uid);
    }
    out.push_str("  </ResponseHeader>\n");

    for reader in readers {
        out.push_str("  <readingSession>\n");
        tag(&mut out, 4, "servicingRadiologistID", reader);
        for n in file
            .nodules
            .iter()
            .chain(&file.small_marks)
            .filter(|n| n.reader_id == reader)
        {
            write_nodule(&mut out, n);
        }
        for n in file.non_nodules.iter().filter(|n| n.reader_id == reader) {
            out.push_str("    <nonNodule>\n");
            tag(&mut out, 6, "nonNoduleID", &n.id);
            tag(&mut out, 6, "imageZposition", &n.z_position.to_string());
            tag(&mut out, 6, "imageSOP_UID", &n.sop_uid);
            out.push_str("      <locus>\n");
            tag(&mut out, 8, "xCoord", &n.point.0.to_string());
            tag(&mut out, 8, "yCoord", &n.point.1.to_string());
            out.push_str("      </locus>\n");
            out.push_str("    </nonNodule>\n");
        }
        out.push_str("  </readingSession>\n");
    }
    out.push_str("</LidcReadMessage>\n");
    out
}

fn write_nodule(out: &mut String, n: &ReaderNodule) {
    out.push_str("    <unblindedReadNodule>\n");
    tag(out, 6, "noduleID", &n.nodule_id);
    if !n.characteristics.is_empty() {
        out.push_str("      <characteristics>\n");
        let known = CHARACTERISTIC_ORDER
            .iter()
            .filter_map(|k| n.characteristics.get_key_value(*k));
        let extra = n
            .characteristics
            .iter()
            .filter(|(k, _)| !CHARACTERISTIC_ORDER.contains(&k.as_str()));
        for (k, v) in known.chain(extra) {
            tag(out, 8, k, &v.to_string());
        }
        out.push_str("      </characteristics>\n");
    }
    for c in &n.contours {
        out.push_str("      <roi>\n");
        tag(out, 8, "imageZposition", &c.z_position.to_string());
        tag(out, 8, "imageSOP_UID", &c.sop_uid);
        tag(out, 8, "inclusion", if c.inclusion { "TRUE" } else { "FALSE" });
        for (x, y) in &c.points {
            out.push_str("        <edgeMap>\n");
            tag(out, 10, "xCoord", &x.to_string());
            tag(out, 10, "yCoord", &y.to_string());
            out.push_str("        </edgeMap>\n");
        }
        out.push_str("      </roi>\n");
    }
    out.push_str("    </unblindedReadNodule>\n");
}

fn tag(out: &mut String, indent: usize, name: &str, value: &str) {
    let _ = writeln!(out, "{:indent$}<{name}>{}</{name}>", "", escape(value));
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}
