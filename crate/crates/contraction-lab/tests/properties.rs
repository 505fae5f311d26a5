mod common;

macro_rules! suite {
    ($name:ident) => {
        #[test]
        fn $name() {
            if let Err(e) = common::run_suite(stringify!($name)) {
                panic!("{e}");
            }
        }
    };
}

suite!(dpi);
suite!(holder);
suite!(fenchel_young);
suite!(contraction_le_one);
suite!(adjointness);
suite!(kstar_rnd);
suite!(recursion_power);
suite!(sandwich);
