use quest_core::scoreboard::{BoardPoint, ScoreboardView};

/// Aligned text table, one row per point, sorted by distance to the
/// projected frontier. Frontier rows carry a leading `*`.
pub fn render_board(view: &ScoreboardView) -> String {
    let mut points: Vec<&BoardPoint> = view.points.iter().collect();
    points.sort_by(|a, b| a.distance.total_cmp(&b.distance));

    let mut rows: Vec<Vec<String>> = vec![vec![
        " ".into(),
        "uid".into(),
        "status".into(),
        view.dim_x.clone(),
        view.dim_y.clone(),
        "distance".into(),
        "platform".into(),
        "labels".into(),
    ]];
    for p in points {
        let labels: Vec<String> = p.labels.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let mut platform = p.platform.cpu.clone();
        if !p.platform.labels.is_empty() {
            platform = format!("{platform} [{}]", p.platform.labels.join(","));
        }
        rows.push(vec![
            if p.on_frontier { "*" } else { " " }.into(),
            p.uid.to_string(),
            p.status.to_string(),
            p.x.to_string(),
            p.y.to_string(),
            format!("{:.4}", p.distance),
            platform,
            labels.join(","),
        ]);
    }

    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row.iter().zip(&widths).map(|(cell, w)| format!("{cell:<w$}")).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}
