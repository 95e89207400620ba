//! Template discovery: breadth-first enumeration of featlet strings,
//! frequency transforms and product generation.

mod enumerate;
mod products;
mod transforms;

pub use enumerate::{
    enumerate_templates, gold_instances, prefixes_change, sample_probes, search_alphabet,
    SearchConfig,
};
pub(crate) use products::binomial;
pub use products::{combinations, generate_products, product_count, Combinations};
pub use transforms::{apply_freq_transforms, count_values, parse_inventory, write_inventory};
