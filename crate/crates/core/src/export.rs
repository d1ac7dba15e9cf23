//! GraphML and JSON serialization of co-citation networks, plus XML helpers.

use std::collections::BTreeMap;

use quick_xml::events::Event;
use quick_xml::Reader;
use serde::{Deserialize, Serialize};

use crate::cocitation::{pair, CoCitationNetwork, EdgeAttrs, NetworkConfig, NodeAttrs, SliceInfo};
use crate::error::{Error, Result};

pub fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c if (c as u32) < 0x20 && !matches!(c, '\t' | '\n' | '\r') => {}
            c => out.push(c),
        }
    }
    out
}

/// Checks that `xml` is a single well-formed element tree.
pub fn check_well_formed(xml: &str) -> Result<()> {
    let mut reader = Reader::from_str(xml);
    reader.config_mut().check_end_names = true;
    let mut depth: usize = 0;
    let mut roots = 0;
    loop {
        match reader.read_event() {
            Ok(Event::Start(_)) => {
                if depth == 0 {
                    roots += 1;
                }
                depth += 1;
            }
            Ok(Event::Empty(_)) => {
                if depth == 0 {
                    roots += 1;
                }
            }
            Ok(Event::End(_)) => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| Error::Xml("unbalanced end tag".into()))?;
            }
            Ok(Event::Text(t)) => {
                t.unescape().map_err(|e| Error::Xml(e.to_string()))?;
            }
            Ok(Event::Eof) => break,
            Ok(_) => {}
            Err(e) => return Err(Error::Xml(format!("at {}: {e}", reader.error_position()))),
        }
    }
    if depth != 0 {
        return Err(Error::Xml("unclosed element at end of document".into()));
    }
    if roots != 1 {
        return Err(Error::Xml(format!("expected one root element, found {roots}")));
    }
    Ok(())
}

pub fn to_graphml(network: &CoCitationNetwork) -> Result<String> {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    for (id, target, ty) in [
        ("config", "graph", "string"),
        ("slices", "graph", "string"),
        ("year", "node", "int"),
        ("count", "node", "int"),
        ("first_cited_year", "node", "int"),
        ("weight", "edge", "int"),
        ("first_cocited_year", "edge", "int"),
    ] {
        s.push_str(&format!(
            "  <key id=\"{id}\" for=\"{target}\" attr.name=\"{id}\" attr.type=\"{ty}\"/>\n"
        ));
    }
    s.push_str("  <graph id=\"cocitation\" edgedefault=\"undirected\">\n");
    s.push_str(&format!(
        "    <data key=\"config\">{}</data>\n",
        xml_escape(&serde_json::to_string(&network.config)?)
    ));
    s.push_str(&format!(
        "    <data key=\"slices\">{}</data>\n",
        xml_escape(&serde_json::to_string(&network.slices)?)
    ));
    for (id, n) in &network.nodes {
        s.push_str(&format!("    <node id=\"{}\">", xml_escape(id)));
        if let Some(y) = n.year {
            s.push_str(&format!("<data key=\"year\">{y}</data>"));
        }
        s.push_str(&format!(
            "<data key=\"count\">{}</data><data key=\"first_cited_year\">{}</data></node>\n",
            n.count, n.first_cited_year
        ));
    }
    for ((a, b), e) in &network.edges {
        s.push_str(&format!(
            "    <edge source=\"{}\" target=\"{}\"><data key=\"weight\">{}</data><data key=\"first_cocited_year\">{}</data></edge>\n",
            xml_escape(a),
            xml_escape(b),
            e.weight,
            e.first_cocited_year
        ));
    }
    s.push_str("  </graph>\n</graphml>\n");
    Ok(s)
}

enum Owner {
    Graph,
    Node(String),
    Edge(String, String),
}

fn parse_int<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Xml(format!("`{key}` value `{v}` is not an integer")))
}

pub fn from_graphml(xml: &str) -> Result<CoCitationNetwork> {
    let mut reader = Reader::from_str(xml);
    reader.config_mut().trim_text(true);
    let xml_err = |e: quick_xml::Error| Error::Xml(e.to_string());

    let mut config: Option<NetworkConfig> = None;
    let mut slices: Vec<SliceInfo> = Vec::new();
    let mut node_data: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    let mut edge_data: BTreeMap<(String, String), BTreeMap<String, String>> = BTreeMap::new();
    let mut owner: Option<Owner> = None;
    let mut data_key: Option<String> = None;
    let mut text = String::new();

    loop {
        let event = reader.read_event().map_err(xml_err)?;
        let (start, empty) = match &event {
            Event::Start(e) => (Some(e.clone()), false),
            Event::Empty(e) => (Some(e.clone()), true),
            _ => (None, false),
        };
        if let Some(e) = start {
            let mut attrs = BTreeMap::new();
            for a in e.attributes() {
                let a = a.map_err(|e| Error::Xml(e.to_string()))?;
                attrs.insert(
                    String::from_utf8_lossy(a.key.as_ref()).into_owned(),
                    a.unescape_value().map_err(xml_err)?.into_owned(),
                );
            }
            match e.name().as_ref() {
                b"graph" => owner = Some(Owner::Graph),
                b"node" => {
                    let id = attrs.remove("id").ok_or_else(|| Error::Xml("node without id".into()))?;
                    node_data.entry(id.clone()).or_default();
                    owner = if empty { None } else { Some(Owner::Node(id)) };
                }
                b"edge" => {
                    let s = attrs.remove("source").ok_or_else(|| Error::Xml("edge without source".into()))?;
                    let t = attrs.remove("target").ok_or_else(|| Error::Xml("edge without target".into()))?;
                    edge_data.entry(pair(&s, &t)).or_default();
                    owner = if empty { None } else { Some(Owner::Edge(s, t)) };
                }
                b"data" => {
                    data_key = attrs.remove("key");
                    text.clear();
                }
                _ => {}
            }
            continue;
        }
        match event {
            Event::Text(t) => text.push_str(&t.unescape().map_err(xml_err)?),
            Event::End(e) => match e.name().as_ref() {
                b"data" => {
                    let key = data_key.take().ok_or_else(|| Error::Xml("data without key".into()))?;
                    let value = std::mem::take(&mut text);
                    match &owner {
                        Some(Owner::Graph) if key == "config" => config = Some(serde_json::from_str(&value)?),
                        Some(Owner::Graph) if key == "slices" => slices = serde_json::from_str(&value)?,
                        Some(Owner::Node(id)) => {
                            node_data.get_mut(id).expect("opened").insert(key, value);
                        }
                        Some(Owner::Edge(s, t)) => {
                            edge_data.get_mut(&pair(s, t)).expect("opened").insert(key, value);
                        }
                        _ => {}
                    }
                }
                b"node" | b"edge" => owner = Some(Owner::Graph),
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
    }

    let mut network = CoCitationNetwork::empty(config.unwrap_or_default());
    network.slices = slices;
    for (id, data) in node_data {
        let get = |k: &str| data.get(k).ok_or_else(|| Error::Xml(format!("node `{id}` lacks `{k}`")));
        let year = data.get("year").map(|y| parse_int("year", y)).transpose()?;
        let attrs = NodeAttrs {
            year,
            count: parse_int("count", get("count")?)?,
            first_cited_year: parse_int("first_cited_year", get("first_cited_year")?)?,
        };
        network.nodes.insert(id, attrs);
    }
    for (p, data) in edge_data {
        let get = |k: &str| data.get(k).ok_or_else(|| Error::Xml(format!("edge {p:?} lacks `{k}`")));
        if p.0 == p.1 {
            return Err(Error::Xml(format!("self-loop on `{}`", p.0)));
        }
        for end in [&p.0, &p.1] {
            if !network.nodes.contains_key(end) {
                return Err(Error::Xml(format!("edge endpoint `{end}` is not a node")));
            }
        }
        let attrs = EdgeAttrs {
            weight: parse_int("weight", get("weight")?)?,
            first_cocited_year: parse_int("first_cocited_year", get("first_cocited_year")?)?,
        };
        network.edges.insert(p, attrs);
    }
    Ok(network)
}

#[derive(Serialize, Deserialize)]
struct JsonNode {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    year: Option<i32>,
    count: u32,
    first_cited_year: i32,
}

#[derive(Serialize, Deserialize)]
struct JsonEdge {
    source: String,
    target: String,
    weight: u32,
    first_cocited_year: i32,
}

#[derive(Serialize, Deserialize)]
struct JsonNetwork {
    config: NetworkConfig,
    slices: Vec<SliceInfo>,
    nodes: Vec<JsonNode>,
    edges: Vec<JsonEdge>,
}

pub fn to_json(network: &CoCitationNetwork) -> Result<String> {
    let doc = JsonNetwork {
        config: network.config.clone(),
        slices: network.slices.clone(),
        nodes: network
            .nodes
            .iter()
            .map(|(id, n)| JsonNode {
                id: id.clone(),
                year: n.year,
                count: n.count,
                first_cited_year: n.first_cited_year,
            })
            .collect(),
        edges: network
            .edges
            .iter()
            .map(|((a, b), e)| JsonEdge {
                source: a.clone(),
                target: b.clone(),
                weight: e.weight,
                first_cocited_year: e.first_cocited_year,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(json: &str) -> Result<CoCitationNetwork> {
    let doc: JsonNetwork = serde_json::from_str(json)?;
    let mut network = CoCitationNetwork::empty(doc.config);
    network.slices = doc.slices;
    for n in doc.nodes {
        network.nodes.insert(
            n.id,
            NodeAttrs {
                year: n.year,
                count: n.count,
                first_cited_year: n.first_cited_year,
            },
        );
    }
    for e in doc.edges {
        if e.source == e.target {
            return Err(Error::invalid(format!("self-loop on `{}`", e.source)));
        }
        network.edges.insert(
            pair(&e.source, &e.target),
            EdgeAttrs {
                weight: e.weight,
                first_cocited_year: e.first_cocited_year,
            },
        );
    }
    Ok(network)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CoCitationNetwork {
        let mut net = CoCitationNetwork::empty(NetworkConfig {
            e_param: Some(2.0),
            lrf: 3.5,
            ..NetworkConfig::default()
        });
        net.nodes.insert("pub.1".into(), NodeAttrs { year: Some(1986), count: 4, first_cited_year: 1990 });
        net.nodes.insert("a<&\"b'>".into(), NodeAttrs { year: None, count: 1, first_cited_year: 1991 });
        net.nodes.insert("solo".into(), NodeAttrs { year: Some(2000), count: 2, first_cited_year: 2001 });
        net.edges.insert(pair("pub.1", "a<&\"b'>"), EdgeAttrs { weight: 3, first_cocited_year: 1991 });
        net.slices.push(SliceInfo { start: 1990, end: 1990, qualifying: 3, selected: 2 });
        net
    }

    #[test]
    fn graphml_round_trip() {
        let net = sample();
        let xml = to_graphml(&net).unwrap();
        check_well_formed(&xml).unwrap();
        assert_eq!(from_graphml(&xml).unwrap(), net);
    }

    #[test]
    fn json_round_trip() {
        let net = sample();
        assert_eq!(from_json(&to_json(&net).unwrap()).unwrap(), net);
    }

    #[test]
    fn malformed_xml_detected() {
        assert!(check_well_formed("<a><b></a>").is_err());
        assert!(check_well_formed("<a>").is_err());
        assert!(check_well_formed("<a/><b/>").is_err());
        assert!(check_well_formed("<a>x &amp; y</a>").is_ok());
    }

    #[test]
    fn dangling_edge_rejected() {
        let xml = r#"<graphml><graph><node id="a"><data key="count">1</data><data key="first_cited_year">2000</data></node><edge source="a" target="zz"><data key="weight">1</data><data key="first_cocited_year">2000</data></edge></graph></graphml>"#;
        assert!(from_graphml(xml).is_err());
    }
}
