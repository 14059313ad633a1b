mod common;

use rmd_core::{LocateTrace, RmdArray};

fn stream_bits(a: &RmdArray, byte: usize) -> String {
    (0..8).map(|b| if a.stream().bytes()[byte] >> b & 1 == 1 { '1' } else { '0' }).collect()
}

#[test]
fn stored_index_values() {
    let (_, a) = common::worked_example();
    let ix = a.index();
    assert_eq!(a.stream().terminator_byte(), 2480);
    assert_eq!(ix.l1_byte()[1], 1200);
    assert_eq!(ix.l2_length_f64(1), 40.0);
    assert_eq!(ix.delta_b(1, 1), -1);
    assert_eq!(ix.delta_c(1, 1), 1);
    assert_eq!(ix.block_start(1, 1), 1239);
    assert_eq!(stream_bits(&a, 1239), "00011011");
}

#[test]
fn locate_trace() {
    let (_, a) = common::worked_example();
    let mut trace = LocateTrace::default();
    let at = a.locate_traced(1060, &mut trace).unwrap();
    assert_eq!((trace.n1, trace.e1, trace.n2, trace.e2), (1, 36, 1, 5));
    assert_eq!(trace.start_byte, 1239);
    assert!(!trace.backward);
    let words: Vec<u8> = trace.steps.iter().map(|s| s.1).collect();
    let cumulative: Vec<u64> = trace.steps.iter().map(|s| s.2).collect();
    assert_eq!(words, [2, 2, 0, 2]);
    assert_eq!(cumulative, [2, 4, 4, 6]);
    assert_eq!(at, (1242, 1));
    assert_eq!(a.get(1060).unwrap(), 3);
}

#[test]
fn whole_example_decodes() {
    let (values, a) = common::worked_example();
    assert_eq!(a.decode_all().unwrap(), values);
    assert_eq!(a.decode_reference().unwrap(), values);
    let mut trace = LocateTrace::default();
    assert_eq!(a.locate_traced(0, &mut trace).unwrap(), (0, 0));
}
