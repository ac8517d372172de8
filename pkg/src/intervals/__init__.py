# Interval Systems Module
