#![allow(dead_code)]

use mmofdm::system::{
    build_allocation, validate_config, AllocationPlan, SystemConfig, ValidConfig,
};

pub fn setup(f: impl FnOnce(&mut SystemConfig)) -> (ValidConfig, AllocationPlan) {
    let mut c = SystemConfig::paper_defaults();
    f(&mut c);
    let v = validate_config(c).unwrap();
    let p = build_allocation(&v);
    (v, p)
}

/// Reference deployment with `n_u` users per subcarrier and `n_c` subcarriers per user.
pub fn grouped(n_u: usize, n_c: usize) -> SystemConfig {
    let mut c = SystemConfig::paper_defaults();
    c.users_per_subcarrier = n_u;
    c.subcarriers_per_user = n_c;
    c.n_users = n_u * c.n_subcarriers / n_c;
    c
}
