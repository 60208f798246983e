//! The shared energy vocabulary, deterministic fixtures and the scripted multi-node
//! scenario covering the TSO/BSP/BRP exchange requirements.

mod fixtures;
mod scenario;

pub use fixtures::{generate_fixtures, DefectManifest, FixtureSet, SeededDefect};
pub use scenario::{
    parse_script, run_scenario, run_script_file, start_nodes, Exchange, FederatedSource, ForecastPayload, NodeSet,
    ScenarioOutcome, ScenarioScript, ScenarioStep, StepKind, TranscriptEntry, REQUIRED_TAGS,
};

/// The worked-example query with a single measure variable.
pub const WORKED_EXAMPLE_QUERY: &str = fixtures::WORKED_EXAMPLE;

/// Namespaces and named terms of the global schema.
pub mod vocab {
    pub const ENERGY: &str = "http://w3id.org/energy/";
    /// CIM classes live under a local namespace; the CIM itself is a UML model.
    pub const CIM: &str = "urn:ede:cim:";
    pub const WD: &str = "http://www.wikidata.org/entity/";
    pub const WDT: &str = "http://www.wikidata.org/prop/direct/";

    pub const ENERGY_GENERATION_CAPACITY: &str = "http://w3id.org/energy/GenerationCapacity";
    pub const ENERGY_PRODUCTION_TYPE_CLASS: &str = "http://w3id.org/energy/ProductionType";
    pub const ENERGY_PRODUCTION_TYPE: &str = "http://w3id.org/energy/productionType";
    pub const ENERGY_COUNTRY: &str = "http://w3id.org/energy/country";
    pub const ENERGY_MEASURE: &str = "http://w3id.org/energy/measure";
    pub const ENERGY_AGG_YEAR: &str = "http://w3id.org/energy/agg_year";

    pub const CIM_POWER_SYSTEM_RESOURCE: &str = "urn:ede:cim:PowerSystemResource";
    pub const CIM_EQUIPMENT_CONTAINER: &str = "urn:ede:cim:EquipmentContainer";
    pub const CIM_REGISTERED_RESOURCE: &str = "urn:ede:cim:RegisteredResource";
    pub const CIM_HOST_CONTROL_AREA: &str = "urn:ede:cim:HostControlArea";
    pub const CIM_CONTROL_AREA_OPERATOR: &str = "urn:ede:cim:ControlAreaOperator";
    pub const CIM_FREQUENCY: &str = "urn:ede:cim:Frequency";
    pub const CIM_PLANT: &str = "urn:ede:cim:Plant";
    pub const CIM_ACTIVE_POWER: &str = "urn:ede:cim:ActivePower";
    pub const CIM_RESERVE_REQ: &str = "urn:ede:cim:ReserveReq";
    pub const CIM_AGREEMENT: &str = "urn:ede:cim:Agreement";
    pub const CIM_BALANCE_SUPPLIER: &str = "urn:ede:cim:BalanceSupplier";

    pub use crate::rdf::vocab::{OWL_SAME_AS, RDFS_LABEL, RDF_TYPE};

    /// Subclass-of in the reference graph.
    pub const WDT_P279: &str = "http://www.wikidata.org/prop/direct/P279";
    /// Renewable energy.
    pub const WD_Q12705: &str = "http://www.wikidata.org/entity/Q12705";

    /// IRI of a production type, e.g. `WindPower`.
    pub fn production_type(name: &str) -> String {
        format!("{ENERGY}productionType/{name}")
    }

    pub const ALL: &[&str] = &[
        ENERGY_GENERATION_CAPACITY,
        ENERGY_PRODUCTION_TYPE_CLASS,
        ENERGY_PRODUCTION_TYPE,
        ENERGY_COUNTRY,
        ENERGY_MEASURE,
        ENERGY_AGG_YEAR,
        CIM_POWER_SYSTEM_RESOURCE,
        CIM_EQUIPMENT_CONTAINER,
        CIM_REGISTERED_RESOURCE,
        CIM_HOST_CONTROL_AREA,
        CIM_CONTROL_AREA_OPERATOR,
        CIM_FREQUENCY,
        CIM_PLANT,
        CIM_ACTIVE_POWER,
        CIM_RESERVE_REQ,
        CIM_AGREEMENT,
        CIM_BALANCE_SUPPLIER,
        RDF_TYPE,
        RDFS_LABEL,
        OWL_SAME_AS,
        WDT_P279,
        WD_Q12705,
    ];

    #[cfg(test)]
    mod tests {
        use super::*;
        use crate::rdf::Iri;

        #[test]
        fn constants_are_valid_iris_under_their_namespace() {
            for c in ALL {
                assert!(Iri::new(*c).is_ok(), "{c}");
            }
            for c in ALL.iter().filter(|c| c.contains(":cim:")) {
                assert!(c.starts_with(CIM));
            }
            assert!(ENERGY_MEASURE.starts_with(ENERGY));
            assert!(WDT_P279.starts_with(WDT) && WD_Q12705.starts_with(WD));
        }
    }
}
