use serde::{Deserialize, Serialize};

use super::{ReaderNodule, SliceGeometry, SliceIndex};
use crate::characteristic::{Characteristic, CharacteristicProfile};
use crate::error::{Error, Result};

pub const DEFAULT_CLUSTER_THRESHOLD_MM: f64 = 5.0;

/// Patient-coordinate point in mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn distance(&self, other: &Point3) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2)).sqrt()
    }
}

/// One physical nodule: the reader marks that were matched together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoduleCluster {
    pub nodule_id: String,
    pub members: Vec<ReaderNodule>,
    pub center: Point3,
    pub long_axis_diameter: f64,
    pub representative_slice: String,
}

/// Mean of every contour vertex of one reader mark, in mm.
pub fn annotation_centroid(nodule: &ReaderNodule, index: &SliceIndex) -> Result<Point3> {
    let mut sum = (0.0, 0.0, 0.0);
    let mut n = 0usize;
    for contour in &nodule.contours {
        let slice = index.get(&contour.sop_uid).ok_or_else(|| Error::Geometry {
            nodule: nodule.label(),
            message: format!("slice {} is not in the series", contour.sop_uid),
        })?;
        for &(x, y) in &contour.points {
            let (xm, ym) = slice.to_mm(f64::from(x), f64::from(y));
            sum.0 += xm;
            sum.1 += ym;
            sum.2 += slice.z;
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::Geometry {
            nodule: nodule.label(),
            message: "no contour points".into(),
        });
    }
    let n = n as f64;
    Ok(Point3 {
        x: sum.0 / n,
        y: sum.1 / n,
        z: sum.2 / n,
    })
}

/// Single-linkage grouping of reader marks whose centroids lie within
/// `threshold_mm` of each other.
///
/// Clusters are ordered by center z, then x, then y; they are numbered
/// `n001`, `n002`, ... in that order. Members are sorted by reader id.
pub fn cluster_nodules(
    reader_nodules: &[ReaderNodule],
    index: &SliceIndex,
    threshold_mm: f64,
) -> Result<Vec<NoduleCluster>> {
    if threshold_mm.is_nan() || threshold_mm <= 0.0 {
        return Err(Error::invalid("cluster threshold must be positive"));
    }
    let centroids = reader_nodules
        .iter()
        .map(|n| annotation_centroid(n, index))
        .collect::<Result<Vec<_>>>()?;

    let mut parent: Vec<usize> = (0..reader_nodules.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..centroids.len() {
        for j in i + 1..centroids.len() {
            if centroids[i].distance(&centroids[j]) <= threshold_mm {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }

    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..reader_nodules.len() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }

    let mut clusters = Vec::with_capacity(groups.len());
    for mut group in groups.into_values() {
        group.sort_by(|&a, &b| member_key(&reader_nodules[a], &centroids[a])
            .partial_cmp(&member_key(&reader_nodules[b], &centroids[b]))
            .unwrap_or(std::cmp::Ordering::Equal));
        let members: Vec<ReaderNodule> = group.iter().map(|&i| reader_nodules[i].clone()).collect();
        let n = group.len() as f64;
        let center = Point3 {
            x: group.iter().map(|&i| centroids[i].x).sum::<f64>() / n,
            y: group.iter().map(|&i| centroids[i].y).sum::<f64>() / n,
            z: group.iter().map(|&i| centroids[i].z).sum::<f64>() / n,
        };
        let slice = representative_slice(center.z, index)
            .ok_or_else(|| Error::invalid("empty slice index"))?;
        let label = members[0].label();
        let diameter = long_axis_diameter(&members, slice, center.z, index).map_err(|e| match e {
            Error::Geometry { message, .. } => Error::Geometry {
                nodule: label.clone(),
                message,
            },
            other => other,
        })?;
        clusters.push(NoduleCluster {
            nodule_id: String::new(),
            members,
            center,
            long_axis_diameter: diameter,
            representative_slice: slice.sop_uid.clone(),
        });
    }

    // members are in canonical order, so centers are bit-identical across
    // input permutations
    clusters.sort_by(|a, b| {
        a.center
            .z
            .total_cmp(&b.center.z)
            .then(a.center.x.total_cmp(&b.center.x))
            .then(a.center.y.total_cmp(&b.center.y))
            .then_with(|| a.members[0].label().cmp(&b.members[0].label()))
    });
    for (k, c) in clusters.iter_mut().enumerate() {
        c.nodule_id = format!("n{:03}", k + 1);
    }
    Ok(clusters)
}

fn member_key(n: &ReaderNodule, c: &Point3) -> (String, String, f64, f64, f64) {
    (n.reader_id.clone(), n.nodule_id.clone(), c.z, c.x, c.y)
}

/// The slice whose z is closest to `center_z`; ties go to the smaller z.
pub fn representative_slice(center_z: f64, index: &SliceIndex) -> Option<&SliceGeometry> {
    // slices are sorted by ascending z, so the first minimum wins ties
    let mut best: Option<(&SliceGeometry, f64)> = None;
    for s in index.slices() {
        let d = (s.z - center_z).abs();
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((s, d));
        }
    }
    best.map(|(s, _)| s)
}

/// Largest in-plane distance (mm) between pooled contour vertices on the
/// representative slice.
///
/// When no member outlined that slice, the member slice nearest in z is used.
pub fn long_axis_diameter(
    members: &[ReaderNodule],
    representative: &SliceGeometry,
    center_z: f64,
    index: &SliceIndex,
) -> Result<f64> {
    let label = members.first().map(|m| m.label()).unwrap_or_default();
    let points_on = |sop: &str| -> Vec<(i32, i32)> {
        members
            .iter()
            .flat_map(|m| &m.contours)
            .filter(|c| c.sop_uid == sop)
            .flat_map(|c| c.points.iter().copied())
            .collect()
    };

    let mut slice = representative;
    let mut points = points_on(&slice.sop_uid);
    if points.is_empty() {
        let fallback = members
            .iter()
            .flat_map(|m| &m.contours)
            .filter_map(|c| index.get(&c.sop_uid))
            .min_by(|a, b| {
                (a.z - center_z)
                    .abs()
                    .total_cmp(&(b.z - center_z).abs())
                    .then(a.z.total_cmp(&b.z))
            })
            .ok_or_else(|| Error::Geometry {
                nodule: label.clone(),
                message: "no contour on any slice of the series".into(),
            })?;
        slice = fallback;
        points = points_on(&slice.sop_uid);
    }

    points.sort_unstable();
    points.dedup();
    let mut best = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let dx = f64::from(a.0 - b.0) * slice.spacing_col;
            let dy = f64::from(a.1 - b.1) * slice.spacing_row;
            best = best.max((dx * dx + dy * dy).sqrt());
        }
    }
    if best > 0.0 {
        Ok(best)
    } else {
        Err(Error::Geometry {
            nodule: label,
            message: "degenerate contour".into(),
        })
    }
}

/// Median of the scores, rounding a .5 median up.
pub fn median_half_up(scores: &mut [i64]) -> Option<i64> {
    if scores.is_empty() {
        return None;
    }
    scores.sort_unstable();
    let n = scores.len();
    Some(if n % 2 == 1 {
        scores[n / 2]
    } else {
        // (a + b) / 2 rounded half up, in integers
        (scores[n / 2 - 1] + scores[n / 2] + 1).div_euclid(2)
    })
}

/// Per characteristic, the half-up median over the cluster's readers.
pub fn aggregate_scores(cluster: &NoduleCluster) -> Result<CharacteristicProfile> {
    let mut per_characteristic = Vec::with_capacity(6);
    for c in Characteristic::ALL {
        let mut scores = Vec::with_capacity(cluster.members.len());
        for m in &cluster.members {
            let value = m.characteristics.get(c.name()).ok_or_else(|| {
                Error::MissingCharacteristic {
                    nodule: format!("{} ({})", cluster.nodule_id, m.label()),
                    field: c.name().into(),
                }
            })?;
            scores.push(*value);
        }
        let median = median_half_up(&mut scores).ok_or_else(|| Error::MissingCharacteristic {
            nodule: cluster.nodule_id.clone(),
            field: c.name().into(),
        })?;
        per_characteristic.push((c, median));
    }
    CharacteristicProfile::try_from_fn(|c| {
        per_characteristic
            .iter()
            .find(|(k, _)| *k == c)
            .map(|(_, v)| *v)
            .unwrap_or(0)
    })
}

/// Median malignancy over the readers that recorded one; metadata only.
pub fn aggregate_malignancy(cluster: &NoduleCluster) -> Option<u8> {
    let mut scores: Vec<i64> = cluster
        .members
        .iter()
        .filter_map(|m| m.characteristics.get("malignancy").copied())
        .collect();
    median_half_up(&mut scores).and_then(|v| u8::try_from(v).ok())
}
