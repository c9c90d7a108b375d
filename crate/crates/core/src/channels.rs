//! A small catalog of channels used in examples, tests and the CLI.

use crate::error::Result;
use crate::infocore::DmcChannel;

/// Two binary senders, binary output: `(0,0) -> 0`, `(1,0),(0,1) -> 1`,
/// and `(1,1)` gives a fair coin.
pub fn example4() -> DmcChannel {
    DmcChannel::from_fn(vec![2, 2], 2, |x| match (x[0], x[1]) {
        (0, 0) => vec![1.0, 0.0],
        (1, 1) => vec![0.5, 0.5],
        _ => vec![0.0, 1.0],
    })
    .expect("static channel is valid")
}

/// Binary symmetric channel with crossover `eps`.
pub fn bsc(eps: f64) -> Result<DmcChannel> {
    DmcChannel::from_fn(vec![2], 2, |x| {
        if x[0] == 0 {
            vec![1.0 - eps, eps]
        } else {
            vec![eps, 1.0 - eps]
        }
    })
}

/// Noiseless single-sender channel over `size` symbols.
pub fn identity(size: usize) -> DmcChannel {
    DmcChannel::from_fn(vec![size], size, |x| {
        let mut row = vec![0.0; size];
        row[x[0]] = 1.0;
        row
    })
    .expect("static channel is valid")
}

/// Noiseless multi-sender channel whose output is the whole input tuple.
pub fn tuple_output(inputs: &[usize]) -> DmcChannel {
    let total: usize = inputs.iter().product();
    let radices = inputs.to_vec();
    DmcChannel::from_fn(inputs.to_vec(), total, |x| {
        let mut row = vec![0.0; total];
        row[crate::infocore::tuple_index(&radices, x)] = 1.0;
        row
    })
    .expect("static channel is valid")
}

/// Binary-input integer adder `Y = X_1 + ... + X_K`.
pub fn binary_adder(senders: usize) -> DmcChannel {
    DmcChannel::from_fn(vec![2; senders], senders + 1, |x| {
        let mut row = vec![0.0; senders + 1];
        row[x.iter().sum::<usize>()] = 1.0;
        row
    })
    .expect("static channel is valid")
}
