use std::path::Path;

use mawc::sim::SimConfig;

#[test]
fn shipped_regression_config_matches_the_library_instance() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/regression_sim.json");
    let shipped: SimConfig = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let built = SimConfig::regression(12, 0).unwrap();
    let (a, b) = (shipped.plan().unwrap(), built.plan().unwrap());
    assert_eq!(a.sizes, b.sizes);
    assert_eq!((a.n_last, a.tau, a.delta), (b.n_last, b.tau, b.delta));
}

fn schema(name: &str) -> serde_json::Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema").join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn keys(v: &serde_json::Value) -> Vec<String> {
    let mut k: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
    k.sort();
    k
}

#[test]
fn schemas_list_every_serialized_field() {
    use mawc::cli::{ExampleParams, RegionConfig};
    use mawc::region::SearchConfig;

    let sim = SimConfig::regression(12, 0).unwrap();
    let sim_json = serde_json::to_value(&sim).unwrap();
    let s = schema("sim_config.schema.json");
    assert_eq!(keys(&s["properties"]), keys(&sim_json));
    assert_eq!(keys(&s["properties"]["rates"]["properties"]), keys(&sim_json["rates"]));
    assert_eq!(keys(&s["$defs"]["ChannelSpec"]["properties"]), keys(&sim_json["channel"]));
    assert_eq!(keys(&s["$defs"]["AuxSpec"]["properties"]), keys(&sim_json["aux"]));

    let region = RegionConfig { channel: sim.channel.clone(), search: SearchConfig::default() };
    let region_json = serde_json::to_value(&region).unwrap();
    let r = schema("region_config.schema.json");
    assert_eq!(keys(&r["properties"]), keys(&region_json));
    assert_eq!(keys(&r["properties"]["search"]["properties"]), keys(&region_json["search"]));

    let e = schema("example_params.schema.json");
    assert_eq!(keys(&e["properties"]), keys(&serde_json::to_value(ExampleParams::default()).unwrap()));
}
