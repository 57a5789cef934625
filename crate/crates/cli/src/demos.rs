pub struct Demo {
    pub name: &'static str,
    pub summary: &'static str,
    pub config: &'static str,
}

pub const DEMOS: &[Demo] = &[
    Demo {
        name: "nonmixing",
        summary: "two full 2-shifts with psi = -1, -2: p(t) = max(-t, -2t) + log 2",
        config: include_str!("../demos/nonmixing.json"),
    },
    Demo {
        name: "hofbauer-rows",
        summary: "one Hofbauer sequence per recurrence regime, classified at t = 1",
        config: include_str!("../demos/hofbauer-rows.json"),
    },
    Demo {
        name: "grid-df",
        summary: "grid potential, gamma = 3: floor reached at t = 1 and kept",
        config: include_str!("../demos/grid-df.json"),
    },
    Demo {
        name: "grid-dfu",
        summary: "perturbed grid potential, gamma = 3, delta = 0.2: flat interval [1, t1]",
        config: include_str!("../demos/grid-dfu.json"),
    },
    Demo {
        name: "chebyshev",
        summary: "4x(1-x): periodic-orbit pressure estimate with a kink at t = -1",
        config: include_str!("../demos/chebyshev.json"),
    },
    Demo {
        name: "mp",
        summary: "Manneville-Pomeau alpha = 0.5 through its first-return model",
        config: include_str!("../demos/mp.json"),
    },
    Demo {
        name: "base-set-pathology",
        summary: "transient doubling-grid model: Z_n on [0,1/2) vs [1/2,1)",
        config: include_str!("../demos/base-set-pathology.json"),
    },
];

pub fn find(name: &str) -> Option<&'static Demo> {
    DEMOS.iter().find(|d| d.name == name)
}
