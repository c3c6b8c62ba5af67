# Suite maintenance scripts and the reference external agent.
